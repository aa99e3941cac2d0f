"""CSV serialization of simulation records."""
import re

import pandas as pd

from flatgrid.models import RECORD_COLUMNS, RECORD_KEYS, TimeSeriesRecord

# 17 significant digits round-trip any IEEE-754 double
FLOAT_FORMAT = '%.17g'

_HEADER = re.compile(r'^(?P<key>[^\s\[]+) \[(?P<unit>[^\]]*)\]$')


def write_frame(frame, path):
    """Write a DataFrame with the project-wide float format and '\\n' line endings."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def record_to_csv(record, path):
    """Write every logged column, headers as 'key [unit]'."""
    write_frame(record.to_frame(), path)


def read_record_csv(path):
    """Read a CSV written by record_to_csv back into a TimeSeriesRecord."""
    frame = pd.read_csv(path, float_precision='round_trip')
    keys = []
    for header in frame.columns:
        match = _HEADER.match(header)
        if not match:
            raise ValueError(f"Unrecognized column header '{header}'")
        keys.append(match.group('key'))
    if tuple(keys) != RECORD_KEYS:
        missing = sorted(set(RECORD_KEYS) - set(keys))
        extra = sorted(set(keys) - set(RECORD_KEYS))
        raise ValueError(f'Column mismatch (missing: {missing}, unexpected: {extra})')

    record = TimeSeriesRecord()
    for (key, _), header in zip(RECORD_COLUMNS, frame.columns):
        if key == 'guard_count':
            record.data[key] = [int(v) for v in frame[header]]
        else:
            record.data[key] = [float(v) for v in frame[header]]
    if len(record):
        record.guard_count = record.data['guard_count'][-1]
    return record
