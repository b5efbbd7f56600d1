"""Scaling maps onto the normalized families and limit-profile comparisons.

A state of the (lam, 1, 1, q) family maps onto exactly one of two normalized
families:

    mu_form: u~(r) = lam^(-1/(q-2)) u(r / sqrt(lam)), solving
             -Delta w + w = mu (I_2*w^2) w + w^(q-1),  mu = lam^(-2(q-3)/(q-2))
    nu_form: u~(r) = lam^(-1) u(r / sqrt(lam)), solving
             -Delta w + w = (I_2*w^2) w + nu w^(q-1),  nu = lam^(q-3)

The regime table says which small parameter goes to zero on each end of the
lambda axis, hence which reference profile (Kwong W or Choquard U) is the
limit.  Scaled potentials are recomputed from the scaled field through the
Newton-theorem sweep rather than rescaled, so the pair stays consistent with
the single-coefficient family used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import operators
from .errors import GridMismatch, InvalidExponent, MixedExponents, WrongParams
from .grid import RadialField, RadialGrid, interpolate
from .solver import GroundState, ModelParams

MU_FORM = "mu_form"
NU_FORM = "nu_form"
KWONG = "kwong"
CHOQUARD = "choquard"

RATIO_WINDOW = (1e-3, 1e3)


@dataclass
class ScalingReport:
    regime: str
    limit_kind: str
    q: float
    side: str
    rows: list            # (lam, small_parameter, sup_distance, h1_distance)
    mass_ratios: list     # (lam, M^(q-2)/lam, M/lam)
    ratios_in_window: bool

    def distances_decreasing(self) -> bool:
        sups = [r[2] for r in self.rows]
        h1s = [r[3] for r in self.rows]
        return (all(b < a for a, b in zip(sups, sups[1:]))
                and all(b < a for a, b in zip(h1s, h1s[1:])))


def limit_regime(q: float, side: str):
    """(scaling form, limit profile) for each (q, lambda-end) regime."""
    if not (2.0 < q < 6.0) or q == 3.0:
        raise InvalidExponent(f"q = {q}")
    if side not in ("zero", "infinity"):
        raise ValueError(f"side must be 'zero' or 'infinity', got {side!r}")
    low_q = q < 3.0
    if side == "zero":
        return (MU_FORM, KWONG) if low_q else (NU_FORM, CHOQUARD)
    return (NU_FORM, CHOQUARD) if low_q else (MU_FORM, KWONG)


def small_parameter(q: float, lam: float, form: str) -> float:
    if form == MU_FORM:
        return lam ** (-2.0 * (q - 3.0) / (q - 2.0))
    if form == NU_FORM:
        return lam ** (q - 3.0)
    raise ValueError(form)


def scale_state(state: GroundState, form: str, target: RadialGrid):
    """Rescale a (lam, 1, 1, q) state onto a normalized family member.

    Returns (scaled_u on the target grid, effective ModelParams).  The scaled
    field samples u at r/sqrt(lam); radii beyond the source domain use the
    zero far-field extension.
    """
    p = state.params
    if p.a != 1.0 or p.nu != 1.0:
        raise WrongParams(f"scale_state needs the (lam,1,1,q) family, got {p.label()}")
    if form not in (MU_FORM, NU_FORM):
        raise ValueError(form)
    lam, q = p.lam, p.q
    amp = lam ** (-1.0 / (q - 2.0)) if form == MU_FORM else 1.0 / lam
    # evaluate u(r/sqrt(lam)) on the target nodes = interpolate after
    # relabeling the source grid radii by sqrt(lam)
    shrunk = RadialGrid(
        r_max=state.grid.r_max * math.sqrt(lam), n=state.grid.n,
        nodes=state.grid.nodes * math.sqrt(lam), h=state.grid.h * math.sqrt(lam),
        weights_dr=state.grid.weights_dr * math.sqrt(lam),
        weights_r2dr=state.grid.weights_r2dr * lam ** 1.5)
    relabeled = RadialField(grid=shrunk, values=amp * state.u.values,
                            parity=state.u.parity)
    scaled = interpolate(relabeled, target)
    scaled.values[-2:] = 0.0
    if form == MU_FORM:
        eff = ModelParams(lam=1.0, a=small_parameter(q, lam, MU_FORM), nu=1.0, q=q)
    else:
        eff = ModelParams(lam=1.0, a=1.0, nu=small_parameter(q, lam, NU_FORM), q=q)
    return scaled, eff


def limit_distance(scaled_u: RadialField, reference: GroundState):
    """(sup distance, H1 distance) between a scaled state and its limit profile."""
    if scaled_u.grid != reference.grid:
        raise GridMismatch("interpolate onto the reference grid first")
    grid = reference.grid
    diff = scaled_u.values - reference.u.values
    sup = float(np.max(np.abs(diff)))
    A = operators.radial_laplacian(grid)
    gsq = operators.grad_sq_pairing(grid, A, diff)
    l2 = float(np.dot(grid.weights_r2dr, diff * diff))
    h1 = math.sqrt(4.0 * math.pi * (gsq + l2))
    return sup, h1


def mass_ratio_report(states: list, window=RATIO_WINDOW):
    """Tabulate (M^(q-2)/lam, M/lam) with M = sup u + sup v per state.

    Both ratios are tabulated; the window flag checks only the regime-relevant
    one (M^(q-2)/lam toward the W limit, M/lam toward U), with the lambda end
    inferred from the trend of the sampled sequence.  A single state is checked
    on both ratios (no trend to infer).
    """
    if not states:
        return [], True
    q = states[0].params.q
    rows = []
    for s in states:
        if s.params.q != q:
            raise MixedExponents("states mix different exponents q")
        M = s.sup_u() + s.sup_v()
        rows.append((s.params.lam, M ** (q - 2.0) / s.params.lam, M / s.params.lam))
    lo, hi = window
    if len(rows) >= 2:
        side = "zero" if rows[-1][0] < rows[0][0] else "infinity"
        j = 1 + relevant_ratio_index(q, side)
        ok = all(lo <= row[j] <= hi for row in rows)
    else:
        ok = all(lo <= r <= hi for r in rows[0][1:])
    return rows, ok


def limit_study(states: list, side: str, reference) -> ScalingReport:
    """Distances of rescaled states to their limit profile plus mass ratios.

    `states` are (lam, 1, 1, q) ground states ordered toward the limit
    (lam decreasing for side='zero', increasing for side='infinity');
    `reference` is the matching Kwong/Choquard profile.
    """
    if not states:
        raise ValueError("need at least one state")
    q = states[0].params.q
    form, kind = limit_regime(q, side)
    rows = []
    for s in states:
        scaled, _ = scale_state(s, form, reference.grid)
        sup, h1 = limit_distance(scaled, reference)
        rows.append((s.params.lam, small_parameter(q, s.params.lam, form),
                     sup, h1))
    ratios, ok = mass_ratio_report(states)
    return ScalingReport(regime=regime_name(q, side), limit_kind=kind, q=q,
                         side=side, rows=rows, mass_ratios=ratios,
                         ratios_in_window=ok)


def regime_name(q: float, side: str) -> str:
    low_q = q < 3.0
    if side == "zero":
        return "q_low_lambda_zero" if low_q else "q_high_lambda_zero"
    return "q_low_lambda_inf" if low_q else "q_high_lambda_inf"


def relevant_ratio_index(q: float, side: str) -> int:
    """0 -> M^(q-2)/lam (W regimes), 1 -> M/lam (U regimes)."""
    _, kind = limit_regime(q, side)
    return 0 if kind == KWONG else 1
