"""Exceptions raised by FlatGrid."""


class FlatGridError(Exception):
    """Base class for all FlatGrid errors."""


class ConfigurationError(FlatGridError, ValueError):
    """Invalid run file, scenario, pole specification or pole set."""

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f'{field}: {message}'
        super().__init__(message)


class DcLinkCollapse(FlatGridError, ValueError):
    """DC-link voltage fell to or below the configured floor."""

    def __init__(self, v_C1, v_floor):
        self.v_C1 = v_C1
        self.v_floor = v_floor
        super().__init__(f'DC-link voltage {v_C1:.3f} V at or below floor {v_floor:.3f} V')


class SimulationFault(FlatGridError):
    """A closed-loop run could not continue.

    Carries the stage time at which the fault was detected and a snapshot
    of the augmented state for the fault report.
    """

    def __init__(self, time, reason, snapshot=None):
        self.time = time
        self.reason = reason
        self.snapshot = snapshot or {}
        super().__init__(f'simulation fault at t = {time * 1e3:.6f} ms: {reason}')

    def report(self):
        """Return the fault report as printable lines."""
        lines = [str(self)]
        for key, value in self.snapshot.items():
            lines.append(f'  {key} = {value}')
        return lines
