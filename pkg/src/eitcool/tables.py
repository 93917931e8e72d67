"""Rectangular numeric tables, CSV output and motional-spectrum file input."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParameterError
from .generic import MotionSpectrum

FLOAT_FORMAT = ".17g"


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, FLOAT_FORMAT)


@dataclass(frozen=True)
class CsvTable:
    header: tuple
    rows: tuple = ()

    def __post_init__(self):
        header = tuple(str(h) for h in self.header)
        if len(set(header)) != len(header):
            raise ParameterError(f"duplicate column names in {header}")
        rows = tuple(tuple(r) for r in self.rows)
        for k, r in enumerate(rows):
            if len(r) != len(header):
                raise ParameterError(f"row {k} has {len(r)} fields, header has {len(header)}")
        object.__setattr__(self, "header", header)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_columns(cls, columns: dict) -> "CsvTable":
        names = tuple(columns)
        arrays = [np.atleast_1d(np.asarray(columns[n])) for n in names]
        sizes = {a.size for a in arrays}
        if len(sizes) > 1:
            raise ParameterError(f"columns differ in length: {sorted(sizes)}")
        return cls(names, tuple(zip(*arrays)) if arrays else ())

    def prepend(self, values: dict) -> "CsvTable":
        """Add constant leading columns (used for swept keys)."""
        lead = tuple(values.values())
        return CsvTable(tuple(values) + self.header, tuple(lead + r for r in self.rows))

    def column(self, name: str) -> np.ndarray:
        k = self.header.index(name)
        return np.array([float(r[k]) for r in self.rows])

    def __len__(self) -> int:
        return len(self.rows)

    def to_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for r in self.rows:
            writer.writerow([format_value(v) for v in r])
        return buf.getvalue()


def concat(tables) -> CsvTable:
    tables = list(tables)
    if not tables:
        raise ParameterError("nothing to concatenate")
    header = tables[0].header
    for t in tables[1:]:
        if t.header != header:
            raise ParameterError("tables have different headers")
    return CsvTable(header, tuple(r for t in tables for r in t.rows))


def emit_csv(table: CsvTable, path=None) -> str:
    """Write ``table`` to ``path`` (or return the text only when ``path`` is None)."""
    text = table.to_text()
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


def read_csv(text: str) -> CsvTable:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ParameterError("empty CSV")
    return CsvTable(tuple(rows[0]), tuple(tuple(float(v) for v in r) for r in rows[1:]))


def load_motion_spectrum(path) -> MotionSpectrum:
    """Whitespace table: a header starting with ``energy`` then one column per x-element column.

    Row ``i`` holds ``e_i`` followed by ``<i|x|j>`` for every ``j``. Complex
    entries use Python syntax such as ``0.1+0.2j``.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read spectrum file {path}: {exc.strerror or exc}") from exc
    lines = [(k, ln.split("#", 1)[0].split()) for k, ln in enumerate(lines, 1)]
    lines = [(k, f) for k, f in lines if f]
    if not lines or lines[0][1][0] != "energy":
        raise ConfigError(f"{path}: header must start with 'energy'")
    ncols = len(lines[0][1])
    body = lines[1:]
    if ncols - 1 != len(body):
        raise ConfigError(f"{path}: {len(body)} levels but {ncols - 1} x-element columns")
    energies, xs = [], []
    for k, fields in body:
        if len(fields) != ncols:
            raise ConfigError(f"{path}: expected {ncols} fields", line=k)
        try:
            energies.append(float(fields[0]))
            xs.append([complex(v) for v in fields[1:]])
        except ValueError:
            raise ConfigError(f"{path}: cannot parse number", line=k) from None
    return MotionSpectrum(np.array(energies), np.array(xs))
