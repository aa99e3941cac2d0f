"""Simulation configuration defaults."""
import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Base configuration."""
    # Integration step and log grid (1 us step, 50 us log spacing)
    DT = float(os.environ.get('FLATGRID_DT', '1e-6'))
    T_END = float(os.environ.get('FLATGRID_T_END', '0.28'))
    DECIMATION = int(os.environ.get('FLATGRID_DECIMATION', '50'))

    # Guards around the modulation-index singularity and the DC-link floor
    I_GUARD = 0.1
    V_GUARD = 10.0
    V_FLOOR = 10.0

    # "Within T" means 99% completion inside T
    WINDOW_SETTLE_FACTOR = 4.6
    POLE_SETTLE_FACTOR = 4.6

    # Summary settings
    EXTINCTION_FRACTION = 0.01
    STEADY_WINDOW_FRACTION = 0.2
    GUARD_STORM_LIMIT = 100

    # Sweep settings
    SWEEP_WORKERS = int(os.environ.get('FLATGRID_SWEEP_WORKERS', '0')) or None

    LOG_LEVEL = os.environ.get('FLATGRID_LOG_LEVEL', 'INFO')


class FineStepConfig(Config):
    """Half-step configuration used for step-size convergence checks."""
    DT = 0.5e-6
    DECIMATION = 100


class QuickConfig(Config):
    """Coarser configuration for sweeps and smoke runs."""
    DT = 2e-6
    DECIMATION = 25


config = {
    'fine': FineStepConfig,
    'quick': QuickConfig,
    'default': Config
}
