"""Experiment drivers: every measured quantity behind the CLI subcommands
and the acceptance suite, with plain-row outputs ready for CSV."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .fields import (
    haar_polynomial,
    single_haar_block,
    standard_random_field,
    trig_band_field,
)
from .fourier import riesz
from .grid import Direction, GridFunction
from .haar import directional_project
from .multiscale import (
    default_even_family,
    default_levels,
    op_norm2_estimate,
    rearrangement_operator,
    ring_projection_operator,
    t_ell,
    t_ell_operator,
)

__all__ = [
    "decomposition_residuals",
    "tl_decay_norms",
    "ring_decay_norms",
    "rearrangement_norms",
    "interpolatory_family",
    "interp_ratio_sup",
    "InterpRow",
]


def decomposition_residuals(
    n: int,
    J: int,
    direction: Direction,
    L_max: int,
    levels: Optional[Sequence[int]] = None,
    seed: int = 0,
) -> tuple[list[float], float]:
    """Residuals ||P u - sum_{|ell| <= L} T_ell u||_2 for L = 0..L_max on the
    standard random field, plus ||P u||_2 for normalization."""
    lv = default_levels(J) if levels is None else list(levels)
    u = standard_random_field(n, J, seed)
    target = directional_project(u, direction, lv)
    base = target.lp_norm(2)
    acc = GridFunction.zeros(n, J)
    residuals = []
    for L in range(L_max + 1):
        ells = [0] if L == 0 else [-L, L]
        for ell in ells:
            acc = acc + t_ell(u, direction, ell, lv, skip_unresolvable=True)
        residuals.append((target - acc).lp_norm(2))
    return residuals, base


def tl_decay_norms(
    n: int,
    J: int,
    direction: Direction,
    ells: Sequence[int],
    levels: Optional[Sequence[int]] = None,
    iters: int = 24,
    seed: int = 0,
) -> dict[int, float]:
    """Power-iteration L2 norms of the scale slices."""
    out: dict[int, float] = {}
    for ell in ells:
        op = t_ell_operator(n, J, direction, ell, levels)
        out[ell] = op_norm2_estimate(op, n, J, iters=iters, seed=seed).value
    return out


def ring_decay_norms(
    n: int,
    J: int,
    direction: Direction,
    lams: Sequence[int],
    base_level: int = 1,
    C: float = 0.5,
    iters: int = 24,
    seed: int = 0,
) -> dict[int, float]:
    """Power-iteration L2 norms of the ring projection over the default
    sparse per-level family."""
    family = default_even_family(n, base_level)
    out: dict[int, float] = {}
    for lam in lams:
        op = ring_projection_operator(n, J, family, direction, lam, C)
        out[lam] = op_norm2_estimate(op, n, J, iters=iters, seed=seed).value
    return out


def rearrangement_norms(
    n: int,
    J: int,
    lams: Sequence[int],
    iters: int = 16,
    seed: int = 0,
) -> dict[int, float]:
    """Power-iteration L2 norms of the rearrangement operator."""
    out: dict[int, float] = {}
    for lam in lams:
        op = rearrangement_operator(n, J, lam)
        out[lam] = op_norm2_estimate(op, n, J, iters=iters, seed=seed).value
    return out


# ---------------------------------------------------------------------------
# interpolatory ratios


@dataclass
class InterpRow:
    family: str
    index: int
    p: float
    regime: str
    norm_P: float
    norm_u: float
    norm_R: float
    ratio: float


def interpolatory_family(
    n: int,
    J: int,
    seed: int,
    i0: int = 1,
    count: int = 25,
) -> list[tuple[str, int, GridFunction]]:
    """The structured test families for the interpolatory-ratio experiment:
    Haar polynomials, single Haar blocks, trigonometric cone fields, the
    coarsest layered test function, and single tensor blocks.  Every member
    is the same underlying function at every J (so the measured sup is
    comparable across resolutions)."""
    fams: list[tuple[str, int, GridFunction]] = []
    for i in range(count):
        fams.append(("haar_poly", i, haar_polynomial(n, J, seed, index=i, max_level=3)))
    blocks = [
        (0, (0,) * n),
        (1, (0,) * n),
        (1, (1,) * n),
        (2, (1,) * n),
    ]
    bi = 0
    for j, k in blocks:
        for eps_idx in range(1, 2**n):
            bits = tuple((eps_idx >> b) & 1 for b in range(n))
            if bits[i0 - 1] != 1:
                continue
            fams.append(("haar_block", bi, single_haar_block(n, J, j, k, bits)))
            bi += 1
    for i in range(count):
        fams.append(("trig_cone", i, trig_band_field(n, J, seed, index=i, i0=i0)))
    if n == 2:
        from .sharpness import BlockSpec, block_field, f_eps_field, single_block_square

        fams.append(("f_eps", 0, f_eps_field(0.5, J)))
        for i, eps in enumerate((0.5, 0.25)):
            fams.append(("block", i, block_field(BlockSpec(single_block_square(), eps), J)))
    return fams


def interp_ratio_sup(
    n: int,
    J: int,
    p: float,
    direction: Direction,
    i0: int,
    seed: int = 0,
    count: int = 25,
) -> tuple[float, list[InterpRow]]:
    """Empirical sup over the families of the interpolatory ratio:
    exponents (1/2, 1/2) for p >= 2 and (1/p, 1/q) for p < 2."""
    if not direction.has_axis(i0):
        raise ValueError(f"direction {direction} not admissible for axis {i0}")
    regime = "pge2" if p >= 2 else "ple2"
    a = 0.5 if p >= 2 else 1.0 / p
    b = 0.5 if p >= 2 else 1.0 - 1.0 / p
    rows: list[InterpRow] = []
    sup = 0.0
    for name, idx, u in interpolatory_family(n, J, seed, i0, count):
        norm_u = u.lp_norm(p)
        if norm_u <= 1e-14:
            continue
        norm_P = directional_project(u, direction).lp_norm(p)
        norm_R = riesz(u, i0).lp_norm(p)
        if norm_R <= 1e-13 * norm_u:
            # R u = 0 forces P u = 0 for admissible directions; record as 0
            ratio = 0.0
        else:
            ratio = norm_P / (norm_u**a * norm_R**b)
        rows.append(InterpRow(name, idx, p, regime, norm_P, norm_u, norm_R, ratio))
        sup = max(sup, ratio)
    return sup, rows
