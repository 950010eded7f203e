"""CSV tables with ``#``-prefixed metadata lines, written deterministically."""

import io
import math


def fmt(value):
    """Shortest round-trip text for a number (``repr`` of a Python float)."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if hasattr(value, "item"):
        return fmt(value.item())
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_table(target, header, rows, metadata=None):
    """Write a table to a path or text stream; returns the text written."""
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {fmt(value) if not isinstance(value, str) else value}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    elif target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text


def read_table(source):
    """Inverse of :func:`write_table`: ``(metadata, header, rows of floats)``."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source) as fh:
            lines = fh.read().splitlines()
    metadata = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].strip().partition(":")
        metadata[key.strip()] = value.strip()
        i += 1
    if i == len(lines):
        raise ValueError("missing header row")
    header = lines[i].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[i + 1 :] if line]
    return metadata, header, rows
