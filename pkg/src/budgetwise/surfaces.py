"""Performance surfaces standing in for "train a model and score it".

A surface maps an annotation allocation (c, s) to a score in [0, 1].
Three families ship here: closed-form logarithmic surfaces, spline
interpolations of a measured score grid, and a non-logarithmic preset
that reproduces the known failure mode of the logarithmic prior.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline


class SurfaceSchemaError(ValueError):
    """A surface file violates the schema; `field` names the offender."""

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field


class PerformanceSurface:
    """Base contract: evaluate(c, s) -> score in [0, 1] on the stated domain."""

    def __init__(self, name: str, max_c: int, max_s: int):
        self.name = name
        self.max_c = max_c
        self.max_s = max_s

    def evaluate(self, c: float, s: float) -> float:
        raise NotImplementedError


class FunctionSurface(PerformanceSurface):
    def __init__(self, name: str, max_c: int, max_s: int, fn: Callable[[float, float], float]):
        super().__init__(name, max_c, max_s)
        self.fn = fn

    def evaluate(self, c: float, s: float) -> float:
        return min(max(self.fn(c, s), 0.0), 1.0)


@dataclass(frozen=True)
class LogSurfaceParams:
    gamma_c: float
    beta_c: float
    gamma_s: float
    beta_s: float
    ceiling: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.ceiling <= 1.0:
            raise ValueError(f"ceiling must lie in (0, 1], got {self.ceiling}")


def synthetic_log_surface(
    params: LogSurfaceParams,
    name: str = "synthetic-log",
    max_c: int = 100_000,
    max_s: int = 100_000,
) -> PerformanceSurface:
    """Closed-form surface growing logarithmically in each count."""

    def fn(c: float, s: float) -> float:
        raw = params.gamma_c * math.log(params.beta_c * c + 1.0) + params.gamma_s * math.log(
            params.beta_s * s + 1.0
        )
        return min(params.ceiling, raw)

    return FunctionSurface(name=name, max_c=max_c, max_s=max_s, fn=fn)


@dataclass(frozen=True)
class SurfaceGrid:
    name: str
    c_knots: tuple[int, ...]
    s_knots: tuple[int, ...]
    scores: tuple[tuple[float, ...], ...]  # scores[j][i] at (c_knots[i], s_knots[j])

    def __post_init__(self) -> None:
        _validate_grid(self.name, self.c_knots, self.s_knots, self.scores)


def _validate_grid(name, c_knots, s_knots, scores) -> None:
    for field, knots in (("c_knots", c_knots), ("s_knots", s_knots)):
        if len(knots) < 2:
            raise SurfaceSchemaError(f"{field} needs at least 2 entries", field)
        if any(k < 0 for k in knots):
            raise SurfaceSchemaError(f"{field} entries must be non-negative", field)
        if any(a >= b for a, b in zip(knots, knots[1:])):
            raise SurfaceSchemaError(f"{field} must be strictly ascending", field)
    if len(scores) != len(s_knots):
        raise SurfaceSchemaError(
            f"scores has {len(scores)} rows, expected one per s_knot ({len(s_knots)})",
            "scores",
        )
    for j, row in enumerate(scores):
        if len(row) != len(c_knots):
            raise SurfaceSchemaError(
                f"scores row {j} has {len(row)} entries, expected {len(c_knots)}", "scores"
            )
        for v in row:
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise SurfaceSchemaError(f"scores row {j} contains {v!r} outside [0, 1]", "scores")


class SplineSurface(PerformanceSurface):
    """Tensor-product natural cubic spline through a score grid.

    Interpolates along c for each s-knot row, then along s at the queried c.
    Queries outside the knot hull clamp coordinates to the hull; outputs
    are clamped to [0, 1]. Grids under 4 knots on either axis fall back to
    bilinear interpolation with a warning.
    """

    def __init__(self, grid: SurfaceGrid):
        super().__init__(name=grid.name, max_c=grid.c_knots[-1], max_s=grid.s_knots[-1])
        self.grid = grid
        self._c = np.asarray(grid.c_knots, dtype=float)
        self._s = np.asarray(grid.s_knots, dtype=float)
        self._z = np.asarray(grid.scores, dtype=float)  # (len(s), len(c))
        self._cubic = len(self._c) >= 4 and len(self._s) >= 4
        if not self._cubic:
            warnings.warn(
                f"grid {grid.name!r} is smaller than 4x4 knots; using bilinear interpolation",
                stacklevel=3,
            )
            self._row_splines = None
        else:
            # One natural cubic spline along c shared by all s-rows.
            self._row_splines = CubicSpline(self._c, self._z, axis=1, bc_type="natural")

    def evaluate(self, c: float, s: float) -> float:
        c = min(max(c, self._c[0]), self._c[-1])
        s = min(max(s, self._s[0]), self._s[-1])
        if self._cubic:
            column = self._row_splines(c)  # value per s-knot at this c
            value = float(CubicSpline(self._s, column, bc_type="natural")(s))
        else:
            ci = np.clip(np.searchsorted(self._c, c) - 1, 0, len(self._c) - 2)
            si = np.clip(np.searchsorted(self._s, s) - 1, 0, len(self._s) - 2)
            tc = (c - self._c[ci]) / (self._c[ci + 1] - self._c[ci])
            ts = (s - self._s[si]) / (self._s[si + 1] - self._s[si])
            value = float(
                (1 - ts) * ((1 - tc) * self._z[si, ci] + tc * self._z[si, ci + 1])
                + ts * ((1 - tc) * self._z[si + 1, ci] + tc * self._z[si + 1, ci + 1])
            )
        return min(max(value, 0.0), 1.0)


def spline_surface(grid: SurfaceGrid) -> SplineSurface:
    return SplineSurface(grid)


def load_surface(path: str | Path) -> SurfaceGrid:
    """Parse and validate a surface grid file.

    Raises:
        FileNotFoundError: missing file.
        SurfaceSchemaError: malformed JSON, schema or invariant violation;
            the exception's `field` attribute names the offender.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"surface file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SurfaceSchemaError(f"malformed JSON in {path}: {exc}", "document") from exc
    if not isinstance(raw, dict):
        raise SurfaceSchemaError("surface document must be a JSON object", "document")
    for field, kind in (("name", str), ("c_knots", list), ("s_knots", list), ("scores", list)):
        if field not in raw:
            raise SurfaceSchemaError(f"missing required field {field!r}", field)
        if not isinstance(raw[field], kind):
            raise SurfaceSchemaError(f"field {field!r} must be a {kind.__name__}", field)
    for field in ("c_knots", "s_knots"):
        if not all(isinstance(k, int) for k in raw[field]):
            raise SurfaceSchemaError(f"{field} entries must be integers", field)
    return SurfaceGrid(
        name=raw["name"],
        c_knots=tuple(raw["c_knots"]),
        s_knots=tuple(raw["s_knots"]),
        scores=tuple(tuple(float(v) for v in row) for row in raw["scores"]),
    )


def save_surface(grid: SurfaceGrid, path: str | Path) -> None:
    doc = {
        "name": grid.name,
        "c_knots": list(grid.c_knots),
        "s_knots": list(grid.s_knots),
        "scores": [list(row) for row in grid.scores],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def noisy_evaluate(
    surface: PerformanceSurface, c: int, s: int, noise_std: float, seed: int
) -> float:
    """Surface score plus Gaussian noise keyed deterministically by (seed, c, s)."""
    clean = surface.evaluate(c, s)
    if noise_std == 0.0:
        return clean
    rng = np.random.default_rng(np.random.SeedSequence((seed % 2**63, int(c), int(s))))
    return min(max(clean + noise_std * float(rng.standard_normal()), 0.0), 1.0)


def _suim_like() -> PerformanceSurface:
    # Classification benefit saturates quickly and then erodes instead of
    # growing logarithmically; segmentation keeps the logarithmic shape.
    def fn(c: float, s: float) -> float:
        seg = 0.20 * math.log(0.02 * s + 1.0)
        cls = 0.30 / (1.0 + math.exp(-(c - 200.0) / 60.0)) * math.exp(-c / 4000.0)
        return seg + cls

    return FunctionSurface(name="suim-like", max_c=1525, max_s=1525, fn=fn)


def preset_surface(name: str) -> PerformanceSurface:
    """Shipped surface presets addressable from the CLI as preset:<name>."""
    if name == "log-default":
        return synthetic_log_surface(
            LogSurfaceParams(gamma_c=0.16, beta_c=0.01, gamma_s=0.08, beta_s=0.03, ceiling=0.95),
            name="log-default",
            max_c=40_000,
            max_s=3_000,
        )
    if name == "oct":
        return synthetic_log_surface(
            LogSurfaceParams(gamma_c=0.03, beta_c=0.005, gamma_s=0.22, beta_s=0.03, ceiling=0.92),
            name="oct",
            max_c=22_723,
            max_s=902,
        )
    if name == "voc":
        return synthetic_log_surface(
            LogSurfaceParams(gamma_c=0.06, beta_c=0.008, gamma_s=0.14, beta_s=0.004, ceiling=0.80),
            name="voc",
            max_c=5_717,
            max_s=10_582,
        )
    if name == "cityscapes-like":
        return synthetic_log_surface(
            LogSurfaceParams(gamma_c=0.05, beta_c=0.01, gamma_s=0.20, beta_s=0.015, ceiling=0.85),
            name="cityscapes-like",
            max_c=2_975,
            max_s=2_975,
        )
    if name == "suim-like":
        return _suim_like()
    raise ValueError(
        f"unknown surface preset {name!r}; available: "
        "log-default, oct, voc, cityscapes-like, suim-like"
    )
