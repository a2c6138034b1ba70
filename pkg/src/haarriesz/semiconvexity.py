"""Separately convex integrands, Jensen's inequality on the range of the
vector projection, the residual ratio, and the desk-scale lower
semicontinuity experiment.

The differential constraint here is the off-diagonal gradient: it vanishes
exactly when each component depends on its own coordinate alone.  For such
sequences, separate convexity compensates for the missing compactness; a
deliberately violating sequence demonstrates that the constraint is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .fourier import derivative
from .grid import GridFunction
from .haar import conditional_expectation, vector_project

__all__ = [
    "Integrand",
    "registry_integrands",
    "check_separately_convex",
    "VectorField",
    "a0_apply",
    "a0_max_entry",
    "jensen_range_check",
    "residual_ratio",
    "SemicontinuityRow",
    "semicontinuity_experiment",
    "oscillation_sequence",
    "contrast_sequence",
]


@dataclass
class Integrand:
    """Real integrand on R^d (d = 2 or 3) with a growth declaration
    0 <= f(a) <= C (1 + |a|^p).  ``fn`` must broadcast over leading axes of
    a stacked argument array of shape (..., d)."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    d: int
    growth_p: float
    growth_C: float

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(a, dtype=np.float64)), dtype=np.float64)


def check_separately_convex(
    f: Integrand,
    box: float = 3.0,
    step: float = 0.1,
    tol: float = -1e-9,
) -> bool:
    """Probe separate convexity: along every axis, second differences on the
    lattice [-box, box]^d must be >= tol."""
    grid = np.arange(-box, box + step / 2, step)
    mesh = np.meshgrid(*([grid] * f.d), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    vals = f(pts)
    for ax in range(f.d):
        sl_lo = [slice(None)] * f.d
        sl_mid = [slice(None)] * f.d
        sl_hi = [slice(None)] * f.d
        sl_lo[ax] = slice(0, -2)
        sl_mid[ax] = slice(1, -1)
        sl_hi[ax] = slice(2, None)
        second = vals[tuple(sl_lo)] - 2.0 * vals[tuple(sl_mid)] + vals[tuple(sl_hi)]
        if float(second.min()) < tol:
            return False
    return True


def registry_integrands(d: int = 2) -> list[Integrand]:
    """The built-in separately convex integrands."""
    if d != 2:
        raise ValueError("the registry ships planar integrands")

    return [
        Integrand("ab", lambda a: a[..., 0] * a[..., 1], 2, 2.0, 1.0),
        Integrand(
            "abs_sum", lambda a: np.abs(a[..., 0]) + np.abs(a[..., 1]), 2, 1.0, 2.0
        ),
        Integrand(
            "quad_cross",
            lambda a: a[..., 0] ** 2 + a[..., 1] ** 2 + a[..., 0] * a[..., 1],
            2,
            2.0,
            2.0,
        ),
        Integrand(
            "relu_prod",
            lambda a: np.maximum(a[..., 0], 0.0) * np.maximum(a[..., 1], 0.0),
            2,
            2.0,
            1.0,
        ),
    ]


@dataclass
class VectorField:
    """n grid fields sharing (n, J): a discrete map from the torus to R^n."""

    components: list[GridFunction]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("empty vector field")
        n = self.components[0].n
        if len(self.components) != n:
            raise ValueError(f"need {n} components, got {len(self.components)}")
        for c in self.components[1:]:
            self.components[0]._check_compatible(c)

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def J(self) -> int:
        return self.components[0].J

    def stacked(self) -> np.ndarray:
        return np.stack([c.values for c in self.components], axis=-1)

    def lp_norm(self, p: float) -> float:
        mag = np.sqrt(sum(c.values**2 for c in self.components))
        vol = self.components[0].cell_volume()
        return float((mag**p).sum() * vol) ** (1.0 / p)


def a0_apply(v: VectorField) -> dict[tuple[int, int], GridFunction]:
    """Off-diagonal gradient: entries (i, j) = d v_j / d x_i for i != j,
    by spectral differentiation."""
    out: dict[tuple[int, int], GridFunction] = {}
    for i in range(1, v.n + 1):
        for j in range(1, v.n + 1):
            if i == j:
                continue
            out[(i, j)] = derivative(v.components[j - 1], i)
    return out


def a0_max_entry(v: VectorField) -> float:
    entries = a0_apply(v)
    return max(float(np.abs(e.values).max()) for e in entries.values())


def jensen_range_check(v: VectorField, f: Integrand, M: int) -> float:
    """min over level-M cells of E_M(f(P(v))) - f(E_M(P(v))); separate
    convexity makes this nonnegative up to rounding."""
    if not check_separately_convex(f):
        raise ValueError(f"integrand {f.name!r} failed the separate-convexity probe")
    if not 0 <= M <= v.J:
        raise ValueError(f"M must be within 0..{v.J}")
    w = vector_project(v.components)
    fw = GridFunction(v.n, v.J, f(np.stack([c.values for c in w], axis=-1)))
    lhs = conditional_expectation(fw, M)
    ew = [conditional_expectation(c, M) for c in w]
    rhs = f(np.stack([c.values for c in ew], axis=-1))
    defect = lhs.values - rhs
    return float(defect.min())


def residual_ratio(v: VectorField, p: float) -> float:
    """||v - P(v)||_p / (||v||_p^{1/2} (sum_{i != j} ||R_i v_j||_p)^{1/2}),
    with 0/0 -> 0."""
    from .fourier import riesz

    if p < 2:
        raise ValueError("the residual inequality is stated for p >= 2")
    w = vector_project(v.components)
    diff = VectorField([a - b for a, b in zip(v.components, w)])
    num = diff.lp_norm(p)
    cross = 0.0
    for i in range(1, v.n + 1):
        for j in range(1, v.n + 1):
            if i == j:
                continue
            cross += riesz(v.components[j - 1], i).lp_norm(p)
    denom = v.lp_norm(p) ** 0.5 * cross**0.5
    if denom == 0.0:
        return 0.0 if num <= 1e-12 else math.inf
    return num / denom


# ---------------------------------------------------------------------------
# semicontinuity experiment


def oscillation_sequence(n: int, J: int, r: int, amplitudes: Optional[Sequence[float]] = None) -> VectorField:
    """Compliant sequence member: component i is a zero-mean profile
    oscillating at frequency 2^r in its own coordinate alone, embedded
    exactly (cell averages of sin)."""
    from .profiles import sine_cell_averages

    amp = list(amplitudes) if amplitudes is not None else [1.0] * n
    N = 2**J
    comps = []
    for ax in range(n):
        vals1d = sine_cell_averages(N, 2.0 * np.pi * 2**r, 0.0, 0.0, 1.0)
        shape = [1] * n
        shape[ax] = N
        arr = np.broadcast_to(vals1d.reshape(shape), (N,) * n).copy() * amp[ax]
        comps.append(GridFunction(n, J, arr))
    return VectorField(comps)


def contrast_sequence(
    n: int, J: int, r: int, amplitudes: Optional[Sequence[float]] = None
) -> VectorField:
    """Deliberate violation: every component oscillates in x_1, so the
    off-diagonal gradient is large.  The default amplitudes (1, -1, ...)
    anti-correlate the components, which drives product-type integrands
    strictly below their weak-limit value."""
    from .profiles import sine_cell_averages

    amp = list(amplitudes) if amplitudes is not None else [(-1.0) ** i for i in range(n)]
    N = 2**J
    vals1d = sine_cell_averages(N, 2.0 * np.pi * 2**r, 0.0, 0.0, 1.0)
    arr = np.broadcast_to(vals1d.reshape([N] + [1] * (n - 1)), (N,) * n)
    return VectorField([GridFunction(n, J, arr * a) for a in amp])


@dataclass
class SemicontinuityRow:
    f_name: str
    r: int
    I_r: float
    I_limit: float
    a0_norm: float
    compliant: bool


def semicontinuity_experiment(
    f: Integrand,
    phi: GridFunction,
    r_list: Sequence[int],
    sequence: Callable[[int], VectorField],
    limit_level: int = 0,
    a0_tol: float = 1e-8,
) -> list[SemicontinuityRow]:
    """Tabulate I_r = sum f(v_r) phi vol against the weak-limit row
    I_inf = int f(v) phi, v the cell means of v_r at ``limit_level``.

    Sequences whose off-diagonal gradient exceeds a0_tol are flagged as
    contrast rows rather than rejected.
    """
    if float(phi.values.min()) < 0.0:
        raise ValueError("test function must be nonnegative")
    rows: list[SemicontinuityRow] = []
    vol = phi.cell_volume()
    for r in r_list:
        v = sequence(r)
        if (v.n, v.J) != (phi.n, phi.J):
            raise ValueError("sequence and test function live on different grids")
        a0 = a0_max_entry(v)
        compliant = a0 <= a0_tol
        fv = f(v.stacked())
        I_r = float((fv * phi.values).sum() * vol)
        limit = [conditional_expectation(c, limit_level) for c in v.components]
        f_lim = f(np.stack([c.values for c in limit], axis=-1))
        I_inf = float((f_lim * phi.values).sum() * vol)
        rows.append(SemicontinuityRow(f.name, r, I_r, I_inf, a0, compliant))
    return rows
