"""CSV input and output.

Input: ``x,y`` rows on a uniform grid over [0, 1], first row at ``x = 0``
(the exact left endpoint), optional single header line. Output floats use
``repr``, the shortest decimal that round-trips.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import GroupedObservations, NoisySampleSet, PiecewiseQuartic, UniformGrid
from .errors import NonUniformGridError, ParseError
from .solver import evaluate

UNIFORM_RTOL = 1e-9


def parse_samples_csv(text: str) -> NoisySampleSet:
    xs, ys = [], []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, got {len(parts)}", lineno)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            if lineno == 1 and not xs:
                continue  # header
            raise ParseError(f"cannot parse {line!r} as numbers", lineno) from None
        xs.append(x)
        ys.append(y)
    if len(xs) < 3:
        raise ParseError("need at least three data rows")
    x = np.array(xs)
    L = len(xs) - 1
    gap = 1.0 / L
    if abs(x[0]) > UNIFORM_RTOL or abs(x[-1] - 1.0) > UNIFORM_RTOL:
        raise NonUniformGridError(f"x must run from 0 to 1, got {x[0]!r} .. {x[-1]!r}")
    dev = np.max(np.abs(np.diff(x) - gap)) / gap
    if dev > UNIFORM_RTOL:
        raise NonUniformGridError(f"x spacing deviates from uniform by relative {dev:.3e}")
    y = np.array(ys)
    return NoisySampleSet(UniformGrid(L), y[1:], y[0], y[-1])


def ingest_csv(path) -> NoisySampleSet:
    return parse_samples_csv(Path(path).read_text())


def samples_csv(samples: NoisySampleSet) -> str:
    L = samples.L
    lines = ["x,y", f"{0.0!r},{samples.left_endpoint_value!r}"]
    for j, v in enumerate(samples.values, start=1):
        lines.append(f"{j / L!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def curve_csv(f: PiecewiseQuartic, points_per_interval: int = 20) -> str:
    """Sampled fit: columns ``x, f, f1``."""
    n = points_per_interval * f.M
    x = np.arange(n + 1) / n
    v, d = evaluate(f, x, 0), evaluate(f, x, 1)
    lines = ["x,f,f1"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(x.tolist(), v.tolist(), d.tolist())]
    return "\n".join(lines) + "\n"


def grouped_csv(grouped: GroupedObservations) -> str:
    """Group means with their coarse intervals (columns ``i, x_left, x_right, x_mid, Y``)."""
    M = grouped.M
    lines = ["i,x_left,x_right,x_mid,Y"]
    for i, v in enumerate(grouped.group_means.tolist(), start=1):
        lines.append(f"{i},{(i - 1) / M!r},{i / M!r},{(2 * i - 1) / (2 * M)!r},{v!r}")
    return "\n".join(lines) + "\n"


def emit_plot_data(
    f: PiecewiseQuartic,
    grouped: GroupedObservations,
    out_dir,
    samples: NoisySampleSet | None = None,
    points_per_interval: int = 20,
) -> list[Path]:
    """Write ``curve.csv``, ``grouped.csv`` and (when given) ``samples.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"curve.csv": curve_csv(f, points_per_interval), "grouped.csv": grouped_csv(grouped)}
    if samples is not None:
        files["samples.csv"] = samples_csv(samples)
    written = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        written.append(p)
    return written
