"""Solution-producing algorithms and solution classification.

Branches covered:

  * ground_state       least-energy solutions via ray-optimal (fibered)
                       minimization over the cone {E > 0, int a|u|^q > 0},
                       with divergence detection for the regimes where the
                       level is unbounded below;
  * m_minus            least positive-energy solutions over the opposite
                       cone {E < 0, int a|u|^q < 0};
  * minimizer_set_at_star
                       finite sample of the minimizer set at the critical
                       threshold, with a data-driven neighborhood radius;
  * local_min_continuation
                       tube-constrained descent that carries those local
                       minimizers past the threshold;
  * order_interval_min box-constrained minimization between a zero
                       subsolution and a supersolution from a larger lam;
  * mountain_pass      string-method saddle search between two nonnegative
                       states joined by the q-mean path
                       ((1-s) u^q + s w^q)^(1/q).

Every descent uses Barzilai-Borwein steps with a nonmonotone line search
and the linear-stiffness preconditioner; iterates are raw nodal arrays
with pinned boundary zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .descent import bb_descent, projected_descent
from .eigen import EigenPair, _stiffness_preconditioner, first_eigenpair
from .errors import (
    AttainabilityError,
    EmptyConeError,
    MeshMismatchError,
    SolverError,
)
from .functionals import EnergyBreakdown, ProblemSpec, evaluate, signed_pow
from .grid import (
    GridFn,
    SignPartition,
    cos_bump,
    gauss_integral,
    gauss_values,
    scatter_gauss_gradient,
    sign_partition,
)

__all__ = [
    "SolveReport",
    "MinimizerSet",
    "PathState",
    "ground_state",
    "m_minus",
    "minimizer_set_at_star",
    "local_min_continuation",
    "order_interval_min",
    "mountain_pass",
    "initial_path",
    "string_relax",
    "runaway_state",
    "multistart_truncated_descent",
    "classify",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50_000
J_FLOOR = -1e7
DEAD_CORE_RTOL = 1e-8
_CONE_EPS = 1e-12
# On the gradient-normalized sphere, E this small with a positive weight
# integral means the iterate has pushed its Rayleigh quotient onto lam
# while staying admissible: the minimization level is unbounded below.
_E_COLLAPSE_RTOL = 1e-8


@dataclass(frozen=True)
class SolveReport:
    """A solution candidate with its energy breakdown and provenance."""

    u: GridFn
    breakdown: EnergyBreakdown
    residual_sup: float
    kind: str  # ground | local_min | order_interval_min | mountain_pass | m_minus
    iterations: int
    lam: float
    status: str = "converged"  # converged | diverged | window_exceeded | saddle_not_found | failed
    positive_on_plus: tuple[bool, ...] | None = None
    dead_core_components: tuple[int, ...] | None = None
    ambiguous_components: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status == "converged"

    @property
    def level(self) -> float:
        return self.breakdown.I_trunc


@dataclass(frozen=True)
class MinimizerSet:
    """Finite sample of the minimizer set at the threshold parameter."""

    members: tuple[GridFn, ...]
    delta: float
    level: float
    lambda_star: float


@dataclass(frozen=True)
class PathState:
    """Ordered chain of states joining two endpoints, with their energies."""

    beads: tuple[GridFn, ...]
    energies: tuple[float, ...]


class _Kernel:
    """Array-level closures for one problem instance (one truncation flag)."""

    def __init__(self, spec: ProblemSpec, truncated: bool):
        self.spec = spec
        self.truncated = truncated
        self.mesh = spec.mesh
        self.p = spec.p
        self.q = spec.q
        self.lam = spec.lam
        self.a1, self.a2 = gauss_values(spec.a.values)
        self.precond = _stiffness_preconditioner(spec.mesh)
        self._amax = spec.a.linf()

    # -- scalar terms -------------------------------------------------
    def terms(self, v: np.ndarray) -> tuple[float, float, float]:
        """(grad term, mass term, weight term) with the kernel's truncation."""
        mesh, p, q = self.mesh, self.p, self.q
        du = np.diff(v)
        grad_term = float(np.sum(np.abs(du) ** p)) / mesh.h ** (p - 1.0)
        g1, g2 = gauss_values(v)
        if self.truncated:
            g1 = np.maximum(g1, 0.0)
            g2 = np.maximum(g2, 0.0)
            mass = gauss_integral(mesh, g1**p, g2**p)
            weight = gauss_integral(mesh, self.a1 * g1**q, self.a2 * g2**q)
        else:
            mass = gauss_integral(mesh, np.abs(g1) ** p, np.abs(g2) ** p)
            weight = gauss_integral(mesh, self.a1 * np.abs(g1) ** q, self.a2 * np.abs(g2) ** q)
        return grad_term, mass, weight

    def EG(self, v: np.ndarray) -> tuple[float, float]:
        grad_term, mass, weight = self.terms(v)
        return grad_term - self.lam * mass, weight

    def I(self, v: np.ndarray) -> float:
        grad_term, mass, weight = self.terms(v)
        return (grad_term - self.lam * mass) / self.p - weight / self.q

    # -- gradients ----------------------------------------------------
    def _grad_parts(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(dE, dG) nodal gradients with the kernel's truncation."""
        mesh, p, q = self.mesh, self.p, self.q
        du = np.diff(v)
        flux = p * signed_pow(du, p - 1.0) / mesh.h ** (p - 1.0)
        dE = np.zeros(mesh.n_nodes)
        dE[:-1] -= flux
        dE[1:] += flux
        g1, g2 = gauss_values(v)
        if self.truncated:
            gp1 = np.maximum(g1, 0.0)
            gp2 = np.maximum(g2, 0.0)
            dE -= self.lam * scatter_gauss_gradient(mesh, p * gp1 ** (p - 1.0), p * gp2 ** (p - 1.0))
            dG = scatter_gauss_gradient(mesh, q * self.a1 * gp1 ** (q - 1.0), q * self.a2 * gp2 ** (q - 1.0))
        else:
            dE -= self.lam * scatter_gauss_gradient(
                mesh, p * signed_pow(g1, p - 1.0), p * signed_pow(g2, p - 1.0)
            )
            dG = scatter_gauss_gradient(
                mesh, q * self.a1 * signed_pow(g1, q - 1.0), q * self.a2 * signed_pow(g2, q - 1.0)
            )
        dE[0] = dE[-1] = 0.0
        return dE, dG

    def grad_I(self, v: np.ndarray) -> np.ndarray:
        dE, dG = self._grad_parts(v)
        return dE / self.p - dG / self.q

    # -- fibered objective ---------------------------------------------
    def J(self, v: np.ndarray) -> float:
        E, G = self.EG(v)
        p, q = self.p, self.q
        coeff = (p - q) / (p * q)
        return -np.sign(E) * coeff * abs(G) ** (p / (p - q)) / abs(E) ** (q / (p - q))

    def grad_J(self, v: np.ndarray) -> np.ndarray:
        E, G = self.EG(v)
        dE, dG = self._grad_parts(v)
        p, q = self.p, self.q
        alpha = p / (p - q)
        beta = q / (p - q)
        coeff = (p - q) / (p * q)
        pref = -np.sign(E) * coeff * abs(G) ** (alpha - 1.0) * abs(E) ** (-beta - 1.0)
        return pref * (alpha * E * dG - beta * G * dE)

    # -- cones and normalization ----------------------------------------
    def in_cone(self, v: np.ndarray, sign: int) -> bool:
        """sign=+1: {E > 0, G > 0}; sign=-1: {E < 0, G < 0} (strict, scaled)."""
        grad_term, mass, weight = self.terms(v)
        E = grad_term - self.lam * mass
        eps_E = _CONE_EPS * max(1.0, grad_term + abs(self.lam) * mass)
        eps_G = _CONE_EPS * max(1.0, self._amax * max(mass, 1.0))
        if sign > 0:
            return E > eps_E and weight > eps_G
        return E < -eps_E and weight < -eps_G

    def normalize(self, v: np.ndarray) -> np.ndarray:
        v = np.array(v)
        v[0] = v[-1] = 0.0  # rescaling must never amplify boundary dust
        du = np.diff(v)
        g = float(np.sum(np.abs(du) ** self.p)) / self.mesh.h ** (self.p - 1.0)
        if g == 0.0:
            raise ValueError("cannot normalize the zero function")
        return v / g ** (1.0 / self.p)

    def energy_collapsed(self, v: np.ndarray) -> bool:
        """True when the normalized iterate has compressed E to roundoff scale
        while keeping a positive weight integral (divergence signature)."""
        vn = self.normalize(v)
        grad_term, mass, weight = self.terms(vn)
        E = grad_term - self.lam * mass
        scale = max(1.0, grad_term + abs(self.lam) * mass)
        return E < _E_COLLAPSE_RTOL * scale and weight > 0.0

    def fiber_project(self, v: np.ndarray) -> np.ndarray:
        E, G = self.EG(v)
        return v * (G / E) ** (1.0 / (self.p - self.q))

    def residual_sup(self, v: np.ndarray) -> float:
        return float(np.max(np.abs(self.grad_I(v))))


def _smooth_noise(mesh, rng: np.random.Generator, modes: int = 6) -> np.ndarray:
    x = (mesh.nodes - mesh.x_lo) / (mesh.x_hi - mesh.x_lo)
    out = np.zeros(mesh.n_nodes)
    for k in range(1, modes + 1):
        out += rng.normal(0.0, 1.0 / k) * np.sin(k * np.pi * x)
    out[0] = out[-1] = 0.0  # sin(k*pi) float dust would break the Dirichlet pin
    return out


def _component_bump(mesh, comp: tuple[int, int]) -> np.ndarray:
    i0, i1 = comp
    lo = mesh.nodes[max(i0 - 1, 0)]
    hi = mesh.nodes[min(i1 + 1, mesh.n_nodes - 1)]
    vals = cos_bump(mesh, 0.5 * (lo + hi), 0.5 * (hi - lo))
    vals[0] = vals[-1] = 0.0
    return vals


def _plus_cone_seeds(
    kernel: _Kernel, partition: SignPartition, pair: EigenPair, count: int, seed: int
) -> list[np.ndarray]:
    """Nonnegative starts inside {E > 0, weight integral > 0}.

    Bump functions centered in each positive-weight component, then random
    positive perturbations of the eigenfunction; one fixed RNG seed per
    start index keeps runs deterministic.
    """
    seeds: list[np.ndarray] = []
    for comp in partition.plus_components:
        v = _component_bump(kernel.mesh, comp)
        if kernel.in_cone(v, +1):
            seeds.append(v)
        if len(seeds) >= count:
            return seeds
    phi = pair.phi.values
    # The bare eigenfunction direction reaches minimizers that hybridize
    # with it (they sit behind a narrow low-E throat that noisy starts miss).
    if len(seeds) < count and kernel.in_cone(phi, +1):
        seeds.append(np.array(phi))
    k = 0
    scale = float(np.max(phi))
    while len(seeds) < count and k < 8 * count:
        rng = np.random.default_rng(seed * 1_000_003 + k)
        v = phi + 0.35 * scale * np.abs(_smooth_noise(kernel.mesh, rng))
        v[0] = v[-1] = 0.0
        if kernel.in_cone(v, +1):
            seeds.append(v)
        k += 1
    return seeds


def _minus_cone_seeds(
    kernel: _Kernel, partition: SignPartition, pair: EigenPair, count: int, seed: int
) -> list[np.ndarray]:
    """Starts inside {E < 0, weight integral < 0}: the eigenfunction mixed
    with bumps in negative-weight components plus small perturbations."""
    seeds: list[np.ndarray] = []
    phi = pair.phi.values
    if kernel.in_cone(phi, -1):
        seeds.append(np.array(phi))
    for comp in partition.minus_components:
        for t in (0.2, 0.5):
            v = phi + t * _component_bump(kernel.mesh, comp) * float(np.max(phi))
            if kernel.in_cone(v, -1):
                seeds.append(v)
            if len(seeds) >= count:
                return seeds
    k = 0
    scale = float(np.max(phi))
    while len(seeds) < count and k < 8 * count:
        rng = np.random.default_rng(seed * 2_000_003 + k)
        v = phi + 0.1 * scale * _smooth_noise(kernel.mesh, rng)
        v[0] = v[-1] = 0.0
        if kernel.in_cone(v, -1):
            seeds.append(v)
        k += 1
    return seeds


def _report_from(
    kernel: _Kernel, vals: np.ndarray, spec: ProblemSpec, kind: str, iterations: int, status: str
) -> SolveReport:
    u = GridFn(spec.mesh, vals)
    return SolveReport(
        u=u,
        breakdown=evaluate(u, spec),
        residual_sup=kernel.residual_sup(vals),
        kind=kind,
        iterations=iterations,
        lam=spec.lam,
        status=status,
    )


def ground_state(
    spec: ProblemSpec,
    starts: int = 8,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    truncated: bool = True,
    j_floor: float = J_FLOOR,
) -> SolveReport:
    """Least-energy solution via ray-optimal minimization over the plus cone.

    Pipeline per start: minimize the 0-homogeneous ray-optimal energy over
    normalized functions in the cone; scale the best point onto the Nehari
    set; polish with monotone descent on the (truncated, by default)
    energy. The level estimate is breakdown.I_trunc of the returned report.

    If the ray-optimal values sink below j_floor the run is reported with
    status "diverged": the minimization level is unbounded below there and
    any returned minimizer would be spurious.
    """
    kernel = _Kernel(spec, truncated)
    partition = sign_partition(spec.a)
    pair = first_eigenpair(spec.mesh, spec.p)
    seeds = _plus_cone_seeds(kernel, partition, pair, starts, seed)
    if not seeds:
        raise SolverError("no admissible start in the positive cone; weight misconfigured?")

    guard = lambda v: kernel.in_cone(v, +1)
    best: SolveReport | None = None
    diverged: SolveReport | None = None
    total_iters = 0

    for v0 in seeds:
        res_a = bb_descent(
            v0,
            kernel.J,
            kernel.grad_J,
            tol=max(100.0 * tol, 1e-6),
            max_iter=min(max_iter, 4_000),
            guard=guard,
            floor=j_floor,
            normalize=kernel.normalize,
            precond=kernel.precond,
        )
        total_iters += res_a.iterations
        if res_a.status == "diverged" or kernel.energy_collapsed(res_a.x):
            proj = kernel.normalize(res_a.x)
            diverged = _report_from(kernel, proj, spec, "ground", total_iters, "diverged")
            continue
        x = kernel.fiber_project(res_a.x)
        res_b = bb_descent(
            x,
            kernel.I,
            kernel.grad_I,
            tol=tol,
            max_iter=max_iter,
            window=5,
            floor=j_floor,
            precond=kernel.precond,
        )
        total_iters += res_b.iterations
        if res_b.status == "diverged":
            diverged = _report_from(kernel, kernel.normalize(res_b.x), spec, "ground", total_iters, "diverged")
            continue
        if res_b.status not in ("converged",):
            continue
        cand = _report_from(kernel, res_b.x, spec, "ground", total_iters, "converged")
        cand_level = cand.breakdown.I_trunc if truncated else cand.breakdown.I
        if best is None or cand_level < (best.breakdown.I_trunc if truncated else best.breakdown.I):
            best = cand
    if best is not None:
        return best
    if diverged is not None:
        return diverged
    raise SolverError("ground state search failed on every start")


def m_minus(
    spec: ProblemSpec,
    starts: int = 8,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> SolveReport:
    """Least positive-energy solution over the minus cone {E < 0, int a|u|^q < 0}.

    The ray-optimal value is positive there (a fiber maximum); minimizing
    it over the cone and scaling onto the Nehari set yields a saddle-type
    solution. Raises EmptyConeError when lam is at or below the first
    eigenvalue (the cone is empty there).
    """
    kernel = _Kernel(spec, truncated=False)
    partition = sign_partition(spec.a)
    pair = first_eigenpair(spec.mesh, spec.p)
    if spec.lam <= pair.lambda1 * (1.0 + 1e-12):
        raise EmptyConeError(
            f"minus cone empty: lam={spec.lam} is not above lambda1={pair.lambda1}"
        )
    seeds = _minus_cone_seeds(kernel, partition, pair, starts, seed)
    if not seeds:
        raise EmptyConeError("no admissible start in the minus cone")

    guard = lambda v: kernel.in_cone(v, -1)
    best: SolveReport | None = None
    total_iters = 0
    for v0 in seeds:
        res_a = bb_descent(
            v0,
            kernel.J,
            kernel.grad_J,
            tol=max(100.0 * tol, 1e-6),
            max_iter=min(max_iter, 4_000),
            guard=guard,
            normalize=kernel.normalize,
            precond=kernel.precond,
        )
        total_iters += res_a.iterations
        x = kernel.fiber_project(res_a.x)
        res_b = bb_descent(
            x,
            kernel.J,
            kernel.grad_J,
            tol=tol,
            max_iter=max_iter,
            guard=guard,
            precond=kernel.precond,
        )
        total_iters += res_b.iterations
        x = kernel.fiber_project(res_b.x)
        status = "converged" if res_b.status in ("converged", "stalled") and kernel.residual_sup(x) < 10 * tol else "failed"
        cand = _report_from(kernel, x, spec, "m_minus", total_iters, status)
        if cand.ok and (best is None or cand.breakdown.I < best.breakdown.I):
            best = cand
    if best is None:
        raise SolverError("positive-level search failed on every start")
    return best


def _sup_dist_to_members(vals: np.ndarray, members: tuple[GridFn, ...]) -> tuple[float, int]:
    dists = [float(np.max(np.abs(vals - m.values))) for m in members]
    k = int(np.argmin(dists))
    return dists[k], k


def minimizer_set_at_star(
    spec_at_star: ProblemSpec,
    sample_count: int = 8,
    delta: float | None = None,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    starts_per_sample: int = 2,
) -> MinimizerSet:
    """Sample the set of minimizers at the threshold parameter.

    Runs sample_count independent multi-start ground-state solves, keeps
    the converged ones at the common minimal level, and clusters them by
    sup-norm distance. The neighborhood radius defaults to half the
    minimal inter-cluster distance, floored at 5% of the largest member
    amplitude. Raises AttainabilityError when every run diverges (wrong
    regime, e.g. positive pairing).
    """
    reports: list[SolveReport] = []
    failures = 0
    for k in range(sample_count):
        try:
            rep = ground_state(
                spec_at_star, starts=starts_per_sample, tol=tol, seed=seed + 17 * k + 1
            )
        except SolverError:
            failures += 1
            continue
        if rep.ok:
            reports.append(rep)
    if not reports:
        raise AttainabilityError(
            "no converged minimizer at the threshold: level appears unbounded below"
        )
    level = min(r.breakdown.I_trunc for r in reports)
    keep = [r for r in reports if r.breakdown.I_trunc <= level + 100.0 * tol * (1.0 + abs(level))]

    clusters: list[GridFn] = []
    for r in keep:
        if not clusters:
            clusters.append(r.u)
            continue
        d, _ = _sup_dist_to_members(r.u.values, tuple(clusters))
        if d > 10.0 * tol:
            clusters.append(r.u)
    members = tuple(clusters)
    max_amp = max(m.linf() for m in members)
    if delta is None:
        # Floor at a quarter of the member amplitude: the continued local
        # minimum drifts by a few percent of the amplitude per percent of
        # lam, and a tighter tube falsely reports window exhaustion.
        if len(members) >= 2:
            gaps = []
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    gaps.append(float(np.max(np.abs(members[i].values - members[j].values))))
            delta = max(0.5 * min(gaps), 0.25 * max_amp)
        else:
            delta = 0.25 * max_amp
    return MinimizerSet(members=members, delta=float(delta), level=float(level), lambda_star=spec_at_star.lam)


def local_min_continuation(
    spec: ProblemSpec,
    kset: MinimizerSet,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveReport:
    """Descend the truncated energy inside the tube around the minimizer set.

    Starts from every member, constrains iterates to sup-norm distance
    <= delta from the set, and succeeds only when the minimizer is interior
    (distance to the tube boundary above 0.1*delta). A boundary-pinned
    minimizer is returned with status "window_exceeded": the local-minimum
    window in lam has been left.
    """
    kernel = _Kernel(spec, truncated=True)
    members = kset.members
    delta = kset.delta

    def project(v: np.ndarray) -> np.ndarray:
        d, k = _sup_dist_to_members(v, members)
        if d <= delta:
            return v
        anchor = members[k].values
        return anchor + (v - anchor) * (delta / d)

    best: SolveReport | None = None
    pinned: SolveReport | None = None
    total_iters = 0
    for m in members:
        res = projected_descent(
            np.array(m.values),
            kernel.I,
            kernel.grad_I,
            project,
            tol=tol,
            max_iter=max_iter,
            precond=kernel.precond,
        )
        total_iters += res.iterations
        d, _ = _sup_dist_to_members(res.x, members)
        interior = d < 0.9 * delta
        if res.status == "converged" and interior:
            cand = _report_from(kernel, res.x, spec, "local_min", total_iters, "converged")
            if best is None or cand.breakdown.I_trunc < best.breakdown.I_trunc:
                best = cand
        else:
            cand = _report_from(kernel, res.x, spec, "local_min", total_iters, "window_exceeded")
            if pinned is None or cand.breakdown.I_trunc < pinned.breakdown.I_trunc:
                pinned = cand
    if best is not None:
        return best
    assert pinned is not None
    return pinned


def order_interval_min(
    spec: ProblemSpec,
    upper: GridFn,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveReport:
    """Minimize the energy over the order interval {0 <= u <= upper}.

    upper should be a solution at a larger lam (a supersolution here). The
    iterate is seeded with a small bump inside a positive-weight component,
    scaled until the energy is negative, and clipped into the box after
    every step. The reported residual is the projected-gradient fixed-point
    residual, which reduces to the plain gradient at interior points.
    """
    if upper.mesh != spec.mesh:
        raise MeshMismatchError("upper bound lives on a different mesh")
    ub = upper.values
    if np.min(ub) < 0.0:
        raise ValueError("upper bound must be nonnegative")
    if not np.any(ub > 0.0):
        raise SolverError("degenerate order interval: upper bound is identically zero")
    kernel = _Kernel(spec, truncated=False)
    partition = sign_partition(spec.a)

    def clip(v: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(v, 0.0), ub)

    seed_vals: np.ndarray | None = None
    for comp in partition.plus_components:
        bump = _component_bump(spec.mesh, comp)
        t = 1.0
        for _ in range(50):
            cand = clip(t * bump)
            if np.any(cand > 0.0) and kernel.I(cand) < 0.0:
                seed_vals = cand
                break
            t *= 0.5
        if seed_vals is not None:
            break
    if seed_vals is None:
        raise SolverError("could not seed a negative-energy start inside the order interval")

    res = projected_descent(
        seed_vals,
        kernel.I,
        kernel.grad_I,
        clip,
        tol=tol,
        max_iter=max_iter,
        precond=kernel.precond,
    )
    status = "converged" if res.status == "converged" else "failed"
    u = GridFn(spec.mesh, clip(res.x))
    fp_residual = float(np.max(np.abs(res.x - clip(res.x - kernel.grad_I(res.x)))))
    return SolveReport(
        u=u,
        breakdown=evaluate(u, spec),
        residual_sup=fp_residual,
        kind="order_interval_min",
        iterations=res.iterations,
        lam=spec.lam,
        status=status,
    )


def initial_path(spec: ProblemSpec, u: GridFn, omega: GridFn, beads: int = 17) -> PathState:
    """q-mean interpolation path ((1-s) u^q + s omega^q)^(1/q), s in [0,1].

    Both endpoints must be nonnegative; the path then stays nonnegative and
    hits the endpoints exactly at s = 0 and s = 1.
    """
    if beads < 9:
        raise ValueError("need at least 9 beads")
    if u.mesh != spec.mesh or omega.mesh != spec.mesh:
        raise MeshMismatchError("path endpoints live on a different mesh")
    if np.min(u.values) < 0.0 or np.min(omega.values) < 0.0:
        raise ValueError("path endpoints must be nonnegative")
    kernel = _Kernel(spec, truncated=True)
    uq = u.values**spec.q
    wq = omega.values**spec.q
    chain = []
    energies = []
    for s in np.linspace(0.0, 1.0, beads):
        vals = ((1.0 - s) * uq + s * wq) ** (1.0 / spec.q)
        vals[0] = vals[-1] = 0.0
        chain.append(GridFn(spec.mesh, vals))
        energies.append(kernel.I(vals))
    return PathState(beads=tuple(chain), energies=tuple(energies))


def _reparametrize(chain: list[np.ndarray]) -> list[np.ndarray]:
    """Redistribute beads uniformly in cumulative sup-norm chord length."""
    n = len(chain)
    seg = np.zeros(n)
    for i in range(1, n):
        seg[i] = seg[i - 1] + float(np.max(np.abs(chain[i] - chain[i - 1])))
    if seg[-1] == 0.0:
        return chain
    targets = np.linspace(0.0, seg[-1], n)
    out = [chain[0]]
    j = 0
    for t in targets[1:-1]:
        while seg[j + 1] < t:
            j += 1
        w = (t - seg[j]) / (seg[j + 1] - seg[j])
        out.append((1.0 - w) * chain[j] + w * chain[j + 1])
    out.append(chain[-1])
    return out


def string_relax(
    spec: ProblemSpec,
    path: PathState,
    *,
    tol: float = 1e-6,
    max_sweeps: int = 2000,
    reparam_every: int = 1,
) -> tuple[PathState, list[float]]:
    """Relax the interior beads of a path by tangentially projected descent.

    Every sweep moves each interior bead along the preconditioned component
    of its energy gradient orthogonal to the local path tangent, with a
    per-bead monotone line search, so the max-bead energy cannot increase
    within a sweep: the recorded barrier history is nonincreasing between
    reparametrizations. Beads are redistributed by arclength every
    reparam_every sweeps, which keeps the chain connected across the
    barrier (skipping it lets beads drain into the endpoint basins) but may
    step the recorded barrier up at those sweeps. Returns the relaxed path
    and the per-sweep barrier history.
    """
    kernel = _Kernel(spec, truncated=True)
    chain = [np.array(b.values) for b in path.beads]
    n = len(chain)
    energies = [kernel.I(v) for v in chain]
    steps = [1e-2] * n
    barrier_history: list[float] = []

    for sweep in range(1, max_sweeps + 1):
        worst_res = 0.0
        for i in range(1, n - 1):
            g = kernel.grad_I(chain[i])
            tau = chain[i + 1] - chain[i - 1]
            norm = float(np.linalg.norm(tau))
            if norm > 0.0:
                tau /= norm
                g_perp = g - float(np.dot(g, tau)) * tau
            else:
                g_perp = g
            worst_res = max(worst_res, float(np.max(np.abs(g_perp))))
            d = kernel.precond(g_perp)
            slope = float(np.dot(g_perp, d))
            if slope <= 0.0:
                continue
            step = steps[i]
            e_old = energies[i]
            for _ in range(40):
                trial = chain[i] - step * d
                e_new = kernel.I(trial)
                if np.isfinite(e_new) and e_new <= e_old - 1e-4 * step * slope:
                    chain[i] = trial
                    energies[i] = e_new
                    # modest growth cap: racing a bead down the far valley
                    # outruns the redistribution and disconnects the chain
                    steps[i] = min(step * 1.5, 10.0)
                    break
                step *= 0.5
            else:
                steps[i] = max(step, 1e-14)
        barrier_history.append(max(energies))
        if worst_res < tol:
            break
        if sweep % reparam_every == 0:
            chain = _reparametrize(chain)
            energies = [kernel.I(v) for v in chain]

    beads = tuple(GridFn(spec.mesh, v) for v in chain)
    return PathState(beads=beads, energies=tuple(energies)), barrier_history


def _climb(kernel: _Kernel, x: np.ndarray, tau: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Saddle refinement by reflected preconditioned descent (dimer-style).

    Gradient-only: curvature information enters solely through
    finite-difference products (grad(x+eps*w)-grad(x-eps*w))/(2*eps). The
    unstable direction v tracks the minimizer of the Hessian quotient
    v.Hv / v.Mv (M = linear stiffness), warm-started between translation
    steps; the translation reverses the preconditioned gradient component
    along v and is safeguarded by a monotone residual test.
    """
    mesh = kernel.mesh
    h = mesh.h

    def m_dot(w1: np.ndarray, w2: np.ndarray) -> float:
        return float(np.dot(np.diff(w1), np.diff(w2))) / h

    def m_normalize(w: np.ndarray) -> np.ndarray:
        return w / np.sqrt(max(m_dot(w, w), 1e-300))

    def hess_apply(xc: np.ndarray, w: np.ndarray) -> np.ndarray:
        eps = 1e-5 * (1.0 + float(np.max(np.abs(xc)))) / max(float(np.max(np.abs(w))), 1e-30)
        return (kernel.grad_I(xc + eps * w) - kernel.grad_I(xc - eps * w)) / (2.0 * eps)

    # Largest curvature of the preconditioned Hessian quotient, by power
    # iteration; bounds the stable step sizes of both loops below.
    def theta_max(xc: np.ndarray) -> float:
        w = m_normalize(np.sin(np.linspace(0.0, 3.0 * np.pi, mesh.n_nodes)))
        est = 1.0
        for _ in range(10):
            w = kernel.precond(hess_apply(xc, w))
            nrm = np.sqrt(max(m_dot(w, w), 1e-300))
            est = nrm
            w /= nrm
        hv = hess_apply(xc, w)
        return max(abs(float(np.dot(w, hv))) / max(m_dot(w, w), 1e-300), est, 1e-6)

    def refine_direction(xc: np.ndarray, v: np.ndarray, sweeps: int, eta: float) -> tuple[np.ndarray, float]:
        v = m_normalize(v)
        theta = 0.0
        for _ in range(sweeps):
            hv = hess_apply(xc, v)
            theta = float(np.dot(v, hv))  # v.Hv with v.Mv = 1
            resid = hv - theta * _apply_stiffness(v, h)
            d = kernel.precond(resid)
            v = m_normalize(v - eta * d)
        return v, theta

    g = kernel.grad_I(x)
    res = float(np.max(np.abs(g)))
    t_max = theta_max(x)
    eta = 0.5 / t_max
    v, theta = refine_direction(x, tau, 30, eta)
    alpha = 0.8 / t_max
    it = 0
    for it in range(1, max_iter + 1):
        if res < tol:
            break
        v, theta = refine_direction(x, v, 3, eta)
        gamma = 0.8 / max(abs(theta), t_max * 1e-3)
        d = kernel.precond(g)
        mv = _apply_stiffness(v, h)
        c = float(np.dot(d, mv))
        accepted = False
        s = 1.0
        for _ in range(40):
            trial = x - s * (alpha * (d - c * v) - gamma * c * v)
            g_t = kernel.grad_I(trial)
            res_t = float(np.max(np.abs(g_t)))
            if res_t <= res * (1.0 + 1e-12) + 1e-18:
                x, g, res = trial, g_t, res_t
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
    return x, it


def _apply_stiffness(w: np.ndarray, h: float) -> np.ndarray:
    """Linear P1 stiffness matrix applied to nodal values (Dirichlet rows zero)."""
    dw = np.diff(w) / h
    out = np.zeros_like(w)
    out[:-1] -= dw
    out[1:] += dw
    out[0] = out[-1] = 0.0
    return out


SADDLE_TOL = 1e-6  # saddle residuals bottom out near the C^1 kink noise floor


def _linear_path(spec: ProblemSpec, kernel: _Kernel, w_lo: np.ndarray, w_hi: np.ndarray, beads: int) -> PathState:
    chain = []
    energies = []
    for s in np.linspace(0.0, 1.0, beads):
        v = (1.0 - s) * w_lo + s * w_hi
        v[0] = v[-1] = 0.0
        chain.append(GridFn(spec.mesh, v))
        energies.append(kernel.I(v))
    return PathState(beads=tuple(chain), energies=tuple(energies))


def mountain_pass(
    spec: ProblemSpec,
    u: GridFn,
    omega: GridFn,
    beads: int = 17,
    *,
    tol: float = SADDLE_TOL,
    string_tol: float = 1e-7,
    max_sweeps: int = 600,
    zoom_levels: int = 8,
    climb_iter: int = 300,
) -> SolveReport:
    """Saddle between a local minimum u and a lower state omega.

    Relaxes the q-mean path by the string method, then recursively
    re-strings the segment between the beads flanking the energy maximum
    (each zoom cuts the bead spacing by an order of magnitude), and
    finishes with a short dimer-style polish. Fails with status
    "saddle_not_found" when the path collapses into one basin.

    The default tolerance is looser than for the minimization solvers: the
    truncated energy is C^1 but not C^2 across dead-core boundaries, which
    caps how far saddle residuals can be driven down.
    """
    kernel = _Kernel(spec, truncated=True)
    e_u = kernel.I(np.array(u.values))
    e_w = kernel.I(np.array(omega.values))
    if not e_w < e_u:
        raise ValueError("omega must have strictly lower energy than u")
    path0 = initial_path(spec, u, omega, beads)
    path, barrier_history = string_relax(spec, path0, tol=string_tol, max_sweeps=max_sweeps)
    energies = np.array(path.energies)
    top = int(np.argmax(energies))
    iterations = len(barrier_history)
    if top in (0, len(energies) - 1) or energies[top] <= max(e_u, e_w) + 1e-14:
        return SolveReport(
            u=path.beads[top],
            breakdown=evaluate(path.beads[top], spec),
            residual_sup=kernel.residual_sup(np.array(path.beads[top].values)),
            kind="mountain_pass",
            iterations=iterations,
            lam=spec.lam,
            status="saddle_not_found",
        )

    best_x = np.array(path.beads[top].values)
    best_res = kernel.residual_sup(best_x)
    best_tau = path.beads[min(top + 1, beads - 1)].values - path.beads[max(top - 1, 0)].values
    for _ in range(zoom_levels):
        if best_res < tol:
            break
        lo = max(top - 1, 0)
        hi = min(top + 1, len(path.beads) - 1)
        sub = _linear_path(spec, kernel, np.array(path.beads[lo].values), np.array(path.beads[hi].values), beads)
        # short segments cannot drain into the basins; redistributing less
        # often lets the top bead settle tightly
        path, hist = string_relax(spec, sub, tol=string_tol * 0.01, max_sweeps=max_sweeps, reparam_every=10)
        iterations += len(hist)
        energies = np.array(path.energies)
        top = int(np.argmax(energies))
        x = np.array(path.beads[top].values)
        res = kernel.residual_sup(x)
        if res < best_res:
            best_x, best_res = x.copy(), res
            best_tau = (
                path.beads[min(top + 1, beads - 1)].values - path.beads[max(top - 1, 0)].values
            )
        if top in (0, len(path.beads) - 1):
            break
    if best_res >= tol and climb_iter > 0:
        x, climb_its = _climb(kernel, best_x, best_tau, tol, climb_iter)
        iterations += climb_its
        res = kernel.residual_sup(x)
        if res < best_res:
            best_x, best_res = x, res
    status = "converged" if best_res < tol else "saddle_not_found"
    ugrid = GridFn(spec.mesh, best_x)
    return SolveReport(
        u=ugrid,
        breakdown=evaluate(ugrid, spec),
        residual_sup=best_res,
        kind="mountain_pass",
        iterations=iterations,
        lam=spec.lam,
        status=status,
    )


def runaway_state(
    spec: ProblemSpec,
    below: float,
    pair: EigenPair | None = None,
    mix: tuple[float, ...] = (0.05, 0.02, 0.01, 0.003, 0.0),
) -> GridFn:
    """Nonnegative state with truncated energy under the given level.

    Scales up a direction with negative truncated E (the eigenfunction,
    optionally mixed with a small bump in a positive-weight component so
    the weight integral stays positive along q-mean paths). Exists for any
    lam above the first eigenvalue; raises SolverError otherwise.
    """
    kernel = _Kernel(spec, truncated=True)
    if pair is None:
        pair = first_eigenpair(spec.mesh, spec.p)
    partition = sign_partition(spec.a)
    bump = None
    if partition.plus_components:
        bump = _component_bump(spec.mesh, max(partition.plus_components, key=lambda c: c[1] - c[0]))
    for eps in mix:
        dirv = pair.phi.values.copy()
        if bump is not None and eps > 0.0:
            dirv = dirv + eps * bump * pair.phi.linf()
        if kernel.EG(dirv)[0] >= 0.0:
            continue
        t = 1.0
        while kernel.I(t * dirv) > below and t < 1e10:
            t *= 1.3
        if kernel.I(t * dirv) <= below:
            return GridFn(spec.mesh, t * dirv)
    raise SolverError(
        "no unbounded descent direction found: lam does not exceed the first eigenvalue"
    )


def multistart_truncated_descent(
    spec: ProblemSpec,
    count: int = 16,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    floor: float = J_FLOOR,
) -> list[SolveReport]:
    """Plain truncated-energy descent from count deterministic seeds.

    Used by nonexistence experiments: each run either converges to some
    nonnegative critical point (possibly with dead cores) or dives below
    the floor and is reported as diverged.
    """
    kernel = _Kernel(spec, truncated=True)
    partition = sign_partition(spec.a)
    pair = first_eigenpair(spec.mesh, spec.p)
    seeds: list[np.ndarray] = []
    for comp in partition.plus_components:
        seeds.append(_component_bump(spec.mesh, comp))
    for comp in partition.minus_components:
        seeds.append(0.5 * _component_bump(spec.mesh, comp))
    k = 0
    phi_amp = float(np.max(pair.phi.values))
    while len(seeds) < count:
        rng = np.random.default_rng(seed * 3_000_017 + k)
        amp = 0.5 + 1.5 * rng.random()
        v = amp * (pair.phi.values / phi_amp) + 0.4 * np.abs(_smooth_noise(spec.mesh, rng))
        v[0] = v[-1] = 0.0
        seeds.append(v)
        k += 1
    reports = []
    for v0 in seeds[:count]:
        res = bb_descent(
            v0,
            kernel.I,
            kernel.grad_I,
            tol=tol,
            max_iter=max_iter,
            floor=floor,
            precond=kernel.precond,
        )
        status = {"converged": "converged", "diverged": "diverged"}.get(res.status, "failed")
        reports.append(_report_from(kernel, res.x, spec, "local_min", res.iterations, status))
    return reports


def classify(report: SolveReport, partition: SignPartition, threshold: float) -> SolveReport:
    """Fill per-component positivity and dead-core flags.

    A positive-weight component counts as positive when every nodal value
    exceeds threshold, as a dead core when every nodal value stays below
    it, and as ambiguous otherwise.
    """
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    vals = report.u.values
    pos: list[bool] = []
    dead: list[int] = []
    ambiguous: list[int] = []
    for idx, (i0, i1) in enumerate(partition.plus_components):
        seg = vals[i0 : i1 + 1]
        if np.all(seg > threshold):
            pos.append(True)
        elif np.all(seg < threshold):
            pos.append(False)
            dead.append(idx)
        else:
            pos.append(False)
            ambiguous.append(idx)
    return replace(
        report,
        positive_on_plus=tuple(pos),
        dead_core_components=tuple(dead),
        ambiguous_components=tuple(ambiguous),
    )
