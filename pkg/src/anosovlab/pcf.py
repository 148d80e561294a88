"""Temporal distance (simple periodic cycle functionals) and matching kernels.

A quadrilateral (a, b in W^s(a), x in W^u_loc(a)) determines the flow-time
mismatch rho with phi^rho(y) = Hol_{a,b}(x), where Hol slides along stable
leaves between weak-unstable transversals and y is the unstable-leaf point
on the orbit of Hol_{a,b}(x). Two independent computations are provided:

* a closed four-term combination of leaf time adjustments around the
  quadrilateral (series route), and
* an explicit construction of the holonomy image and of y on parameterized
  leaves, with fibers obtained from long finite Birkhoff differences along
  exact rational orbits (geometric route).

Their agreement is the package's central dual oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateGradients, NoIntersection, OffLeaf
from .flow import FlowPoint, SuspensionFlow, wrap_unit
from .roof import RoofFunction
from . import mpspec, util

_MEMBERSHIP_TOL = 1e-12


# ---------------------------------------------------------------------------
# quadrilaterals


@dataclass(frozen=True)
class Quadrilateral:
    """PCF input data: corner a, stable displacement, unstable displacement."""

    a: FlowPoint
    s_disp: tuple[float, ...]
    u_disp: tuple[float, ...]

    @staticmethod
    def build(
        flow: SuspensionFlow, a: FlowPoint, s_disp, u_disp,
        chart_radius: float | None = None,
    ) -> "Quadrilateral":
        """Validate displacements against the flow's splitting and chart."""
        radius = flow.chart_radius if chart_radius is None else chart_radius
        s_arr = np.asarray([float(v) for v in s_disp], dtype=float)
        u_arr = np.asarray([float(v) for v in u_disp], dtype=float)
        for arr, sub in ((s_arr, "stable"), (u_arr, "unstable")):
            vu, vs = flow.split_displacement(arr)
            bad = np.linalg.norm(vu if sub == "stable" else vs)
            if bad > _MEMBERSHIP_TOL:
                raise OffLeaf(f"{sub} displacement has transverse part {bad:.2e}")
            if np.linalg.norm(arr) > radius + 1e-12:
                raise NoIntersection(
                    f"{sub} displacement norm {np.linalg.norm(arr):.3g} exceeds "
                    f"chart radius {radius:.3g}"
                )
        return Quadrilateral(a=a, s_disp=tuple(s_arr), u_disp=tuple(u_arr))


def sample_quadrilaterals(
    flow: SuspensionFlow, n: int, seed: int,
    s_scale: float = 0.02, u_scale: float = 0.02,
) -> list[Quadrilateral]:
    """Deterministic random quadrilaterals with displacements in the frames."""
    rng = np.random.default_rng(seed)
    s_frame = flow.stable_frame()
    u_frame = flow.unstable_frame()
    quads = []
    for _ in range(n):
        base = rng.random(flow.dim)
        fiber = rng.uniform(0.0, flow.roof(base))
        a = flow.make_point(base, fiber)
        s_coef = rng.uniform(-1.0, 1.0, s_frame.shape[1]) * s_scale
        u_coef = rng.uniform(-1.0, 1.0, u_frame.shape[1]) * u_scale
        quads.append(
            Quadrilateral.build(flow, a, s_frame @ s_coef, u_frame @ u_coef)
        )
    return quads


# ---------------------------------------------------------------------------
# temporal distance, series route


def temporal_distance_series(flow: SuspensionFlow, quad: Quadrilateral) -> float:
    """Signed combination of four leaf time adjustments around the quadrilateral.

    With T_s(x -> y) and T_u(x -> y) the stable/unstable adjustments,

        rho = T_u(a -> x) + T_s(x -> Hol(x)) - T_s(a -> b) - T_u(b -> y),

    which is the fiber gap between Hol_{a,b}(x) and y in the defining
    equation. Vanishes identically when either displacement is zero or the
    roof is constant.
    """
    alpha = quad.a.base()
    w = np.asarray(quad.s_disp)
    u = np.asarray(quad.u_disp)
    t_u_ax = flow.time_adjustment(alpha, alpha + u, "unstable")
    t_s_xh = flow.time_adjustment(alpha + u, alpha + u + w, "stable")
    t_s_ab = flow.time_adjustment(alpha, alpha + w, "stable")
    t_u_by = flow.time_adjustment(alpha + w, alpha + w + u, "unstable")
    return (t_u_ax + t_s_xh) - (t_s_ab + t_u_by)


# ---------------------------------------------------------------------------
# temporal distance, geometric route


def _stable_coordinate(flow: SuspensionFlow, v: np.ndarray) -> float:
    vu, vs = flow.split_displacement(v)
    s_frame = flow.stable_frame()
    return float(s_frame[:, 0] @ vs / (s_frame[:, 0] @ s_frame[:, 0]))


def _forward_horizon(flow: SuspensionFlow, scale: float, target: float) -> int:
    lam = max(m for m in flow.spectral.moduli if m < 1.0)
    lip = flow.roof.poly.lipschitz_bound()
    if lip == 0.0 or scale == 0.0:
        return 1
    need = target * (1.0 - lam) / (lip * scale)
    n = int(np.ceil(np.log(need) / np.log(lam))) + 2
    return int(np.clip(n, 8, 500))


def _backward_horizon(flow: SuspensionFlow, scale: float, target: float) -> int:
    xi1 = min(m for m in flow.spectral.moduli if m > 1.0)
    rate = 1.0 / xi1
    lip = flow.roof.poly.lipschitz_bound()
    if lip == 0.0 or scale == 0.0:
        return 1
    need = target * (1.0 - rate) / (lip * scale)
    n = int(np.ceil(np.log(need) / np.log(rate))) + 2
    return int(np.clip(n, 8, 500))


def temporal_distance_geometric(
    flow: SuspensionFlow, quad: Quadrilateral, tol: float = 1e-8,
    chart_radius: float | None = None,
) -> float:
    """Construct Hol_{a,b}(x) and y explicitly and return their fiber gap.

    Leaf fibers come from finite Birkhoff differences along exact rational
    orbits (forward for stable graphs, backward for unstable ones), with
    horizons chosen so tails sit well under tol. The stable slide is
    root-solved on the leaf parameterization; the unstable-leaf match is a
    frame solve. Raises NoIntersection when the data leave the chart.
    """
    if tol < 1e-10:
        raise ValueError("tol must be at least 1e-10")
    radius = flow.chart_radius if chart_radius is None else chart_radius
    alpha = quad.a.base()
    w = np.asarray(quad.s_disp)
    u = np.asarray(quad.u_disp)
    if np.linalg.norm(w) > radius or np.linalg.norm(u) > radius:
        raise NoIntersection("quadrilateral displacements exceed the chart radius")

    target = 0.02 * tol
    n_fwd = _forward_horizon(flow, max(np.linalg.norm(w), 1e-6), target)
    n_bwd = _backward_horizon(flow, max(np.linalg.norm(u), 1e-6), target)

    # Exact hyperbolic orbits amplify any off-leaf defect of the inputs by
    # lambda^-n backward; refine the displacements onto their subspaces in
    # extended precision before rationalizing, so corner points share leaves
    # to ~1e-48 and the long Birkhoff differences stay clean.
    split = mpspec.splitting(flow.base)
    w_fr = split.project_fractions(w, "stable")
    u_fr = split.project_fractions(u, "unstable")
    alpha_fr = flow.rationalize(alpha)

    def forward_diff(z0, z1) -> float:
        # sum_{k<N} roof(F^k z1) - roof(F^k z0), exact orbits
        return flow.birkhoff_exact(z1, n_fwd) - flow.birkhoff_exact(z0, n_fwd)

    def backward_diff(z0, z1) -> float:
        # sum_{k=1..N} roof(F^-k z0) - roof(F^-k z1)
        return flow.birkhoff_exact(z0, n_bwd, backward=True) - flow.birkhoff_exact(
            z1, n_bwd, backward=True
        )

    # corner points of the quadrilateral in the base
    beta_fr = tuple(a + b for a, b in zip(alpha_fr, w_fr))    # base of b on W^s(a)
    zeta_fr = tuple(a + b for a, b in zip(alpha_fr, u_fr))    # base of x on W^u(a)
    beta = np.array([float(v) for v in beta_fr])
    zeta = np.array([float(v) for v in zeta_fr])
    fiber_b = forward_diff(alpha_fr, beta_fr)
    fiber_x = backward_diff(alpha_fr, zeta_fr)

    # Hol_{a,b}(x): slide x along its stable leaf until the base point lies
    # on beta + E^u; root-solve the stable coordinate along the slide.
    s_unit = flow.stable_frame()[:, 0]

    def stable_coord_after(tau: float) -> float:
        return _stable_coordinate(flow, zeta + tau * s_unit - beta)

    bracket = 4.0 * radius
    f_lo, f_hi = stable_coord_after(-bracket), stable_coord_after(bracket)
    if f_lo == 0.0:
        tau_star = -bracket
    elif f_hi == 0.0:
        tau_star = bracket
    elif np.sign(f_lo) == np.sign(f_hi):
        raise NoIntersection("stable slide does not cross the unstable transversal")
    else:
        tau_star = brentq(stable_coord_after, -bracket, bracket, xtol=1e-15)
    hol_base = zeta + tau_star * s_unit
    if np.linalg.norm(hol_base - alpha) > 4.0 * radius:
        raise NoIntersection("holonomy image left the chart")
    # the slide equals the refined stable displacement; assemble it exactly
    hol_fr = tuple(a + b for a, b in zip(zeta_fr, w_fr))
    if np.linalg.norm(hol_base - np.array([float(v) for v in hol_fr])) > 1e-9:
        raise NoIntersection("root-solved slide disagrees with the leaf geometry")
    fiber_hol = fiber_x + forward_diff(zeta_fr, hol_fr)

    # y = W^u(b) intersect the orbit of Hol(x): match base points through the
    # unstable frame at b
    frame = np.hstack([flow.unstable_frame(), flow.stable_frame()])
    coords = np.linalg.solve(frame, hol_base - beta)
    n_u = flow.dim_unstable
    if np.max(np.abs(coords[n_u:])) > 1e-9:
        raise NoIntersection("orbit of the holonomy image misses the unstable leaf")
    y_fr = tuple(a + b for a, b in zip(beta_fr, u_fr))
    y_base = np.array([float(v) for v in y_fr])
    fiber_y = fiber_b + backward_diff(beta_fr, y_fr)

    if np.linalg.norm(wrap_unit(y_base - hol_base)) > 1e-9:
        raise NoIntersection("intersection bases failed to match")
    return float(fiber_hol - fiber_y)


@dataclass(frozen=True)
class TemporalDistanceSample:
    quad: Quadrilateral
    value_series: float
    value_geometric: float

    @property
    def discrepancy(self) -> float:
        return abs(self.value_series - self.value_geometric)


def temporal_distance_sample(
    flow: SuspensionFlow, quad: Quadrilateral, tol: float = 1e-8
) -> TemporalDistanceSample:
    return TemporalDistanceSample(
        quad=quad,
        value_series=temporal_distance_series(flow, quad),
        value_geometric=temporal_distance_geometric(flow, quad, tol=tol),
    )


def sample_csv_rows(samples: list[TemporalDistanceSample]) -> list[list]:
    rows = []
    for s in samples:
        rows.append([
            *[float(c) for c in s.quad.a.x], float(s.quad.a.s),
            *[float(c) for c in s.quad.s_disp],
            *[float(c) for c in s.quad.u_disp],
            float(s.value_series), float(s.value_geometric), float(s.discrepancy),
        ])
    return rows


def sample_csv_header(dim: int) -> list[str]:
    return [
        *[f"ax{i + 1}" for i in range(dim)], "as",
        *[f"sdisp{i + 1}" for i in range(dim)],
        *[f"udisp{i + 1}" for i in range(dim)],
        "value_series", "value_geometric", "discrepancy",
    ]


# ---------------------------------------------------------------------------
# PCF gradients in the unstable parameter


def _bunching_ratios(flow: SuspensionFlow) -> tuple[float, float]:
    lam = max(m for m in flow.spectral.moduli if m < 1.0)
    xis = [m for m in flow.spectral.moduli if m > 1.0]
    return lam * max(xis), 1.0 / min(xis)


def pcf_gradient(
    flow: SuspensionFlow, a: FlowPoint, s_disp, u_disp
) -> np.ndarray:
    """Derivative of the temporal distance in the unstable parameter.

    Returns the covector components with respect to the columns of the
    unstable frame, evaluated at the quadrilateral point x = a + u_disp.
    Term-wise differentiation of the series route gives a two-sided sum of
    paired gradient differences; the forward side converges only under the
    bunching condition lambda * xi_max < 1, which holds automatically for
    volume-preserving codimension-one data with dim E^u >= 2.
    """
    w = np.asarray([float(v) for v in s_disp], dtype=float)
    u = np.asarray([float(v) for v in u_disp], dtype=float)
    vu, vs = flow.split_displacement(w)
    if np.linalg.norm(vu) > _MEMBERSHIP_TOL:
        raise OffLeaf("s_disp must lie in the stable subspace")
    vu, vs = flow.split_displacement(u)
    if np.linalg.norm(vs) > _MEMBERSHIP_TOL:
        raise OffLeaf("u_disp must lie in the unstable subspace")

    q_fwd, q_bwd = _bunching_ratios(flow)
    if q_fwd >= 0.98:
        raise ValueError(
            "gradient series requires the bunching ratio lambda*xi_max < 1 "
            f"(got {q_fwd:.3f}); it diverges for 2-dimensional base maps"
        )
    poly = flow.roof.poly
    if poly.is_constant():
        return np.zeros(flow.dim_unstable)
    hess = poly.gradient_lipschitz_bound()
    lip = poly.lipschitz_bound()
    lin = flow.base.as_array()
    lin_inv = np.array(flow.base.inverse_entries(), dtype=float)
    z0 = a.base() + u

    u_frame = flow.unstable_frame()
    total = np.zeros(u_frame.shape[1])

    # forward side: points F^n(z), gaps L^n w (projected); the weight L^n is
    # applied to the unstable frame only, where it grows like xi_max^n and
    # the paired gradient difference shrinks like lambda^n
    point = flow.rationalize(z0)
    delta = flow._proj_s @ w
    weight = u_frame.copy()
    for n in range(4000):
        gd = poly.gradient_diff(point, delta)
        total += weight.T @ gd
        point = flow.base_apply_exact(point)
        delta = flow._proj_s @ (lin @ delta)
        weight = lin @ weight
        bound = hess * np.linalg.norm(delta) * np.linalg.norm(weight, 2)
        if bound * q_fwd / (1.0 - q_fwd) < 1e-15:
            break
    else:
        raise ArithmeticError("forward gradient series did not converge")

    # backward side: points F^-n(z), gaps L^-n w mod 1 (exact, wrapped); the
    # restricted weights L^-n U contract and bound the unpaired gradients,
    # with per-step projection stopping stable float contamination
    point = flow.base_apply_inv_exact(flow.rationalize(z0))
    delta_fr = tuple((Fraction(float(v))) for v in w)
    inv_entries = flow.base.inverse_entries()

    def inv_wrap(vec):
        out = []
        for i in range(flow.dim):
            val = sum(inv_entries[i][j] * vec[j] for j in range(flow.dim))
            val = val - round(val)
            out.append(val)
        return tuple(out)

    delta_fr = inv_wrap(delta_fr)
    weight = flow._proj_u @ (lin_inv @ u_frame)
    for n in range(4000):
        gd = poly.gradient_diff(point, [float(v) for v in delta_fr])
        total += weight.T @ gd
        point = flow.base_apply_inv_exact(point)
        delta_fr = inv_wrap(delta_fr)
        weight = flow._proj_u @ (lin_inv @ weight)
        wnorm = np.linalg.norm(weight, 2)
        bound = 2.0 * lip * wnorm
        if bound * q_bwd / (1.0 - q_bwd) < 1e-15:
            break
    else:
        raise ArithmeticError("backward gradient series did not converge")

    return total


# ---------------------------------------------------------------------------
# matching kernels


@dataclass(frozen=True)
class MatchingKernelReport:
    base_point: FlowPoint
    gradients: tuple[tuple[float, ...], ...]   # rows in unstable-frame coords
    kernel_dim: int
    kernel_basis: np.ndarray                   # ambient d x kernel_dim


def matching_kernel_dimension(
    flow: SuspensionFlow,
    base_point: FlowPoint,
    pairs: list[tuple[FlowPoint, tuple]],
    rel_cutoff: float = 1e-9,
) -> MatchingKernelReport:
    """Common kernel of the PCF differentials at base_point.

    Each pair (a, s_disp) defines a PCF on W^u_loc(a); base_point must lie
    on that leaf, and the gradient is taken at its unstable offset from a.
    """
    if not pairs:
        raise ValueError("at least one pair is required")
    rows = []
    for a, s_disp in pairs:
        offset = wrap_unit(base_point.base() - a.base())
        vu, vs = flow.split_displacement(offset)
        if np.linalg.norm(vs) > 1e-9:
            raise OffLeaf("base_point is not on the unstable leaf of a pair corner")
        rows.append(pcf_gradient(flow, a, s_disp, vu))
    grad_rows = np.array(rows)
    kern = util.kernel_basis(grad_rows, rel_cutoff=rel_cutoff)
    kernel_dim = kern.shape[1]
    ambient = flow.unstable_frame() @ kern if kernel_dim else np.zeros((flow.dim, 0))
    return MatchingKernelReport(
        base_point=base_point,
        gradients=tuple(tuple(float(v) for v in row) for row in grad_rows),
        kernel_dim=kernel_dim,
        kernel_basis=ambient,
    )


def find_independent_pairs(
    flow: SuspensionFlow,
    base_point: FlowPoint,
    count: int = 2,
    seed: int = 0,
    budget: int = 200,
    s_scale: float = 0.02,
    u_scale: float = 0.02,
    independence_cutoff: float = 0.05,
) -> list[tuple[FlowPoint, tuple]]:
    """Seeded random search for PCF pairs with independent gradients.

    Draws corners a on the unstable leaf through base_point and stable
    displacements, keeping draws that increase the gradient stack's rank
    (smallest singular value relative to the largest above the cutoff).
    Raises DegenerateGradients when the budget is exhausted.
    """
    rng = np.random.default_rng(seed)
    u_frame = flow.unstable_frame()
    s_frame = flow.stable_frame()
    chosen: list[tuple[FlowPoint, tuple]] = []
    rows: list[np.ndarray] = []
    for _ in range(budget):
        c = rng.uniform(-1.0, 1.0, u_frame.shape[1]) * u_scale
        s_coef = rng.uniform(-1.0, 1.0, s_frame.shape[1]) * s_scale
        a = flow.make_point(base_point.base() - u_frame @ c, base_point.s)
        s_disp = s_frame @ s_coef
        grad = pcf_gradient(flow, a, s_disp, u_frame @ c)
        cand = rows + [grad]
        sv = np.linalg.svd(np.array(cand), compute_uv=False)
        if sv[-1] > independence_cutoff * sv[0] and sv[0] > 1e-12:
            rows.append(grad)
            chosen.append((a, tuple(float(v) for v in s_disp)))
            if len(chosen) == count:
                return chosen
    raise DegenerateGradients(
        f"found only {len(chosen)} independent gradients within {budget} draws"
    )


# ---------------------------------------------------------------------------
# planted conjugacies


@dataclass(frozen=True)
class TranslationConjugacy:
    """Torus translation lifted to the suspension: (x, s) -> (x + v, s)."""

    v: tuple[Fraction, ...]

    def vector(self) -> np.ndarray:
        return np.array([float(c) for c in self.v])

    def apply_base(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) + self.vector()) % 1.0

    def invert_base(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.vector()) % 1.0

    def apply(self, target_flow: SuspensionFlow, p: FlowPoint) -> FlowPoint:
        return target_flow.make_point(self.apply_base(p.base()), p.s)


def translate_flow(flow: SuspensionFlow, v) -> tuple[SuspensionFlow, TranslationConjugacy]:
    """Pushforward of the suspension under the torus translation by v.

    The conjugated base map is x -> Lx + (I - L)v and the roof shifts to
    roof(x - v), so h(x, s) = (x + v, s) intertwines the flows exactly.
    """
    vfr = tuple(Fraction(c) for c in v)
    ent = flow.base.entries
    d = flow.dim
    lv = tuple(sum(ent[i][j] * vfr[j] for j in range(d)) for i in range(d))
    translation = tuple((vfr[i] - lv[i] + flow.translation[i]) % 1 for i in range(d))
    shifted = RoofFunction(flow.roof.poly.shift([float(c) for c in vfr]))
    pushed = SuspensionFlow(
        flow.base, shifted, translation=translation, chart_radius=flow.chart_radius
    )
    return pushed, TranslationConjugacy(v=vfr)


def conjugacy_invariance_check(
    flow1: SuspensionFlow,
    flow2: SuspensionFlow,
    conjugacy: TranslationConjugacy,
    quads: list[Quadrilateral],
) -> float:
    """Max |rho_1(quad) - rho_2(image quad)| over the supplied quadrilaterals."""
    worst = 0.0
    for quad in quads:
        rho1 = temporal_distance_series(flow1, quad)
        image = Quadrilateral(
            a=conjugacy.apply(flow2, quad.a),
            s_disp=quad.s_disp,
            u_disp=quad.u_disp,
        )
        rho2 = temporal_distance_series(flow2, image)
        worst = max(worst, abs(rho1 - rho2))
    return worst


# ---------------------------------------------------------------------------
# local conjugacy reconstruction on an unstable patch


@dataclass(frozen=True)
class PatchReconstruction:
    grid_offsets: np.ndarray        # (n, dim_u) coordinates in the unstable frame
    recovered: np.ndarray           # (n, d) recovered h^{-1} images (base points)
    expected: np.ndarray            # (n, d) true h^{-1} images
    sup_error: float


def _pcf_map(flow, pairs, point_base) -> np.ndarray:
    values = []
    for a, s_disp in pairs:
        offset = wrap_unit(point_base - a.base())
        vu, vs = flow.split_displacement(offset)
        quad = Quadrilateral(a=a, s_disp=tuple(s_disp), u_disp=tuple(vu))
        values.append(temporal_distance_series(flow, quad))
    return np.array(values)


def reconstruct_conjugacy_patch(
    flow1: SuspensionFlow,
    flow2: SuspensionFlow,
    conjugacy: TranslationConjugacy,
    base_point: FlowPoint,
    pairs: list[tuple[FlowPoint, tuple]],
    patch_radius: float = 0.01,
    grid_n: int = 3,
    newton_tol: float = 1e-12,
) -> PatchReconstruction:
    """Invert the PCF chart to recover the conjugacy on an unstable patch.

    With P1 = (rho^1_1, rho^1_2) built from two independent pairs at
    base_point and P2 the matched chart for the conjugated flow, the map
    P1^{-1} o P2 is evaluated on a grid of the unstable patch through
    h(base_point) and compared against the known inverse translation.
    """
    n_u = flow1.dim_unstable
    if len(pairs) < n_u:
        raise DegenerateGradients(f"need {n_u} pairs for a {n_u}-dimensional patch")
    jac_rows = []
    for a, s_disp in pairs:
        offset = wrap_unit(base_point.base() - a.base())
        vu, _ = flow1.split_displacement(offset)
        jac_rows.append(pcf_gradient(flow1, a, s_disp, vu))
    jac = np.array(jac_rows)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[-1] <= 1e-9 * max(sv[0], 1e-30) or sv[0] < 1e-12:
        raise DegenerateGradients(
            f"PCF gradients are not independent at the base point (sv={sv})"
        )

    pairs2 = [
        (conjugacy.apply(flow2, a), s_disp) for a, s_disp in pairs
    ]
    u_frame = flow1.unstable_frame()
    base2 = conjugacy.apply_base(base_point.base())

    axes = [np.linspace(-patch_radius, patch_radius, grid_n)] * n_u
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)

    recovered = []
    expected = []
    for c in offsets:
        target_base2 = (base2 + u_frame @ c) % 1.0
        values2 = _pcf_map(flow2, pairs2, target_base2)
        # Newton with the frozen Jacobian: the chart is near-affine on the patch
        coef = np.zeros(n_u)
        for _ in range(60):
            current = (base_point.base() + u_frame @ coef) % 1.0
            resid = _pcf_map(flow1, pairs, current) - values2
            if np.linalg.norm(resid) < newton_tol:
                break
            coef = coef - np.linalg.solve(jac, resid)
        recovered.append((base_point.base() + u_frame @ coef) % 1.0)
        expected.append(conjugacy.invert_base(target_base2))
    recovered = np.array(recovered)
    expected = np.array(expected)
    sup_error = float(
        max(
            np.linalg.norm(wrap_unit(r - e))
            for r, e in zip(recovered, expected)
        )
    )
    return PatchReconstruction(
        grid_offsets=offsets, recovered=recovered, expected=expected,
        sup_error=sup_error,
    )
