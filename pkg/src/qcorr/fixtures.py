"""Published reference data for the Werner-state experiment.

The measured correlation matrices of the singlet and of white noise, and the
two tables of measures for Werner states at p = 0.3, ..., 1.0.  Values are
kept as the printed decimal strings; bars are (minus, plus) and ``None`` when
no bar was printed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

R_BELL_TEXT = (
    ("0.971", "0.073", "0.010"),
    ("0.073", "0.966", "-0.009"),
    ("0.010", "-0.009", "0.941"),
)
R_NOISE_TEXT = (
    ("0.017", "0.006", "-0.007"),
    ("0.006", "0.013", "0.016"),
    ("-0.007", "0.016", "0.006"),
)


def _matrix(text) -> np.ndarray:
    m = np.array([[float(x) for x in row] for row in text])
    m.setflags(write=False)
    return m


R_BELL = _matrix(R_BELL_TEXT)
R_NOISE = _matrix(R_NOISE_TEXT)

P_VALUES = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

# p | per measure: theory, experiment, minus, plus  ("-" means no bar printed)
_TABLE1_ROWS = """
0.3 | 0.000 0.000 - - | 0.000 0.000 - - | 0.000 0.000 - -
0.4 | 0.000 0.000 - - | 0.000 0.000 - - | 0.100 0.106 0.030 0.031
0.5 | 0.000 0.000 - - | 0.000 0.000 - - | 0.250 0.248 0.022 0.034
0.6 | 0.000 0.000 - - | 0.200 0.172 0.168 0.078 | 0.400 0.391 0.028 0.027
0.7 | 0.000 0.000 0.000 0.145 | 0.485 0.463 0.064 0.046 | 0.550 0.534 0.041 0.032
0.8 | 0.529 0.528 0.098 0.068 | 0.678 0.654 0.043 0.047 | 0.700 0.679 0.038 0.038
0.9 | 0.787 0.783 0.057 0.064 | 0.846 0.818 0.041 0.045 | 0.850 0.824 0.038 0.042
1.0 | 1.000 0.993 0.133 0.007 | 1.000 0.969 0.092 0.030 | 1.000 0.969 0.098 0.031
"""
TABLE1_MEASURES = ("bell_B", "steering_S", "fef")

_TABLE2_ROWS = """
0.3 | 0.000 0.000 - - | 0.000 0.000 - -
0.4 | 0.000 0.000 - - | 0.000 0.000 - -
0.5 | 0.000 0.000 - - | 0.000 0.000 - -
0.6 | 0.000 0.000 - - | 0.054 0.040 0.040 0.044
0.7 | 0.000 0.000 - - | 0.290 0.267 0.064 0.050
0.8 | 0.317 0.316 0.112 0.086 | 0.527 0.494 0.055 0.062
0.9 | 0.659 0.652 0.085 0.101 | 0.763 0.723 0.058 0.066
1.0 | 1.000 0.989 0.233 0.011 | 1.000 0.952 0.141 0.048
"""
TABLE2_MEASURES = ("steering_S2", "steering_S3")


@dataclass(frozen=True)
class TableEntry:
    p: float
    measure: str
    theory: str
    experiment: str
    minus: str | None
    plus: str | None

    @property
    def theory_value(self) -> float:
        return float(self.theory)

    @property
    def experiment_value(self) -> float:
        return float(self.experiment)

    @property
    def has_bars(self) -> bool:
        return self.minus is not None

    def bars(self) -> tuple[float, float]:
        """(minus, plus) as floats, zero when none were printed."""
        if self.minus is None:
            return 0.0, 0.0
        return float(self.minus), float(self.plus)


def _parse(rows: str, measures) -> tuple[TableEntry, ...]:
    out = []
    for line in rows.strip().splitlines():
        p_text, *cells = (c.split() for c in line.split("|"))
        for name, (th, ex, lo, hi) in zip(measures, cells, strict=True):
            out.append(TableEntry(
                float(p_text[0]), name, th, ex,
                None if lo == "-" else lo, None if hi == "-" else hi,
            ))
    return tuple(out)


TABLE1 = _parse(_TABLE1_ROWS, TABLE1_MEASURES)
TABLE2 = _parse(_TABLE2_ROWS, TABLE2_MEASURES)
TABLES = {"table1": TABLE1, "table2": TABLE2}


def table_entry(measure: str, p: float) -> TableEntry:
    for e in TABLE1 + TABLE2:
        if e.measure == measure and abs(e.p - p) < 1e-12:
            return e
    raise KeyError(f"no published entry for {measure} at p={p}")
