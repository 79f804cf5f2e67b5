"""Named weight families for experiments and the command line.

Three families cover every parameter regime the solvers distinguish:

  two-bump            one compactly supported positive bump and one
                      negative bump; amplitudes and geometry tune the sign
                      of the pairing with the first eigenfunction. The
                      defaults give a strongly negative pairing.
  orthogonal-two-bump two-bump rebalanced so the raw pairing is slightly
                      positive, then shifted by a constant so the pairing
                      vanishes to roundoff. The shift makes the weight
                      negative outside the positive bump, so exactly one
                      positive component survives.
  perturbed           any base weight plus mu times a nonnegative bump.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenPair, first_eigenpair, orthogonalize_weight, pairing
from .errors import ConfigError
from .grid import Mesh, Weight, cos_bump

__all__ = [
    "TwoBumpParams",
    "two_bump",
    "orthogonal_two_bump",
    "bump_weight",
    "perturbed",
    "build_weight",
]

MU_MAX_FRACTION = 0.5  # refuse when mu*||b||_inf exceeds this times ||a||_inf


@dataclass(frozen=True)
class TwoBumpParams:
    amp_plus: float = 20.0
    center_plus: float = 0.7
    width_plus: float = 0.2
    amp_minus: float = 60.0
    center_minus: float = 0.25
    width_minus: float = 0.22


def two_bump(mesh: Mesh, params: TwoBumpParams = TwoBumpParams()) -> Weight:
    vals = params.amp_plus * cos_bump(mesh, params.center_plus, params.width_plus)
    vals -= params.amp_minus * cos_bump(mesh, params.center_minus, params.width_minus)
    return Weight(mesh, vals)


def bump_weight(mesh: Mesh, center: float, width: float, amp: float = 1.0) -> Weight:
    """Single nonnegative bump, e.g. the perturbation direction b."""
    return Weight(mesh, amp * cos_bump(mesh, center, width))


_ORTHO_DEFAULTS = TwoBumpParams(
    amp_plus=10.0,
    center_plus=0.25,
    width_plus=0.25,
    amp_minus=10.0,
    center_minus=0.75,
    width_minus=0.2,
)


def orthogonal_two_bump(
    mesh: Mesh,
    p: float,
    q: float,
    params: TwoBumpParams = _ORTHO_DEFAULTS,
    eigen_tol: float = 1e-9,
    margin: float = 0.05,
) -> Weight:
    """Two-bump weight with pairing exactly zero at the discrete level.

    The positive amplitude is first rebalanced so the raw pairing is
    positive by the given relative margin; the constant shift of the
    orthogonalization is then positive and small, which keeps a single
    positive component inside the positive bump's support.
    """
    pair = first_eigenpair(mesh, p, eigen_tol)
    plus = Weight(mesh, params.amp_plus * cos_bump(mesh, params.center_plus, params.width_plus))
    minus_vals = params.amp_minus * cos_bump(mesh, params.center_minus, params.width_minus)
    minus = Weight(mesh, minus_vals)
    p_plus = pairing(plus, pair, q)
    p_minus = pairing(minus, pair, q)
    if p_plus <= 0.0 or p_minus <= 0.0:
        raise ConfigError("bump geometry gives a degenerate pairing; widen the bumps")
    amp_plus = params.amp_plus * (1.0 + margin) * p_minus / p_plus
    raw = Weight(mesh, amp_plus / params.amp_plus * plus.values - minus_vals)
    return orthogonalize_weight(raw, pair, q)


def perturbed(base: Weight, b: Weight, mu: float) -> Weight:
    """base + mu*b with a refusal heuristic for oversized perturbations."""
    if base.mesh != b.mesh:
        raise ConfigError("base weight and perturbation live on different meshes")
    if np.min(b.values) < 0.0:
        raise ConfigError("perturbation direction must be nonnegative")
    if mu < 0.0:
        raise ConfigError("mu must be nonnegative")
    if mu * b.linf() > MU_MAX_FRACTION * base.linf():
        raise ConfigError(
            f"mu={mu} exceeds the perturbation window ({MU_MAX_FRACTION} * ||a||_inf / ||b||_inf)"
        )
    return Weight(base.mesh, base.values + mu * b.values)


def build_weight(
    mesh: Mesh,
    family: str,
    p: float,
    q: float,
    *,
    params: TwoBumpParams | None = None,
    mu: float = 0.0,
    b_center: float | None = None,
    b_width: float | None = None,
    weight_file: str | None = None,
    eigen_tol: float = 1e-9,
) -> Weight:
    """Instantiate a weight family by name (the CLI entry point)."""
    if family == "file":
        if weight_file is None:
            raise ConfigError("weight_family=file requires weight_file")
        vals = np.loadtxt(weight_file)
        return Weight(mesh, vals)
    if family == "two-bump":
        return two_bump(mesh, params or TwoBumpParams())
    if family == "orthogonal-two-bump":
        return orthogonal_two_bump(mesh, p, q, params or _ORTHO_DEFAULTS, eigen_tol)
    if family == "perturbed":
        prm = params or _ORTHO_DEFAULTS
        base = orthogonal_two_bump(mesh, p, q, prm, eigen_tol)
        center = b_center if b_center is not None else prm.center_plus
        width = b_width if b_width is not None else prm.width_plus
        return perturbed(base, bump_weight(mesh, center, width), mu)
    raise ConfigError(f"unknown weight family: {family!r}")
