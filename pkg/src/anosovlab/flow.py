"""Suspension-flow kinematics over a hyperbolic toral automorphism.

The mapping torus is represented by its fundamental domain
{(x, s): 0 <= s < roof(x)} with the identification (x, roof(x)+s) ~ (Lx, s).
Strong stable/unstable leaves through a point are graphs over the base
subspaces; their fiber offsets come from convergent time-adjustment series
with geometric tail control.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import OffLeaf
from .roof import RoofFunction
from .spectral import IntegerMatrix, SpectralData, spectral_data

_TERM_BOUND = 1e-14      # truncation threshold for adjustment series
_LEAF_TOL = 1e-10        # transverse-component tolerance before OffLeaf
_MAX_TERMS = 5000


def wrap_unit(v: np.ndarray) -> np.ndarray:
    """Componentwise representative in [-1/2, 1/2)."""
    return (np.asarray(v, dtype=float) + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class FlowPoint:
    """Point of the mapping torus: base x in [0,1)^d, fiber 0 <= s < roof(x)."""

    x: tuple[float, ...]
    s: float

    def base(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)


class SuspensionFlow:
    """Suspension of a hyperbolic toral automorphism under a positive roof.

    The base map may carry a rational translation part (x -> Lx + c mod 1),
    which is how pushforwards under torus translations are represented; the
    linear part alone drives all spectral data.
    """

    def __init__(
        self,
        base: IntegerMatrix,
        roof: RoofFunction,
        translation=None,
        chart_radius: float = 0.05,
    ):
        if roof.dim != base.dim:
            raise ValueError("roof dimension does not match the base map")
        self.base = base
        self.roof = roof
        self.chart_radius = float(chart_radius)
        self.translation = (
            tuple(Fraction(v) for v in translation)
            if translation is not None
            else tuple(Fraction(0) for _ in range(base.dim))
        )
        self.spectral: SpectralData = spectral_data(base)
        self._lin = base.as_array()
        self._inv_entries = base.inverse_entries()
        self._lin_inv = np.array(self._inv_entries, dtype=float)
        self._trans = np.array([float(v) for v in self.translation])
        frame = np.hstack([self.spectral.unstable_basis, self.spectral.stable_basis])
        if frame.shape[1] != base.dim:
            raise ValueError("spectral splitting is not a full frame")
        self._frame = frame
        self._frame_inv = np.linalg.inv(frame)
        self._n_u = self.spectral.unstable_basis.shape[1]
        nu = self._n_u
        self._proj_u = frame[:, :nu] @ self._frame_inv[:nu, :]
        self._proj_s = frame[:, nu:] @ self._frame_inv[nu:, :]

    # -- base-map plumbing ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def dim_unstable(self) -> int:
        return self._n_u

    def unstable_frame(self) -> np.ndarray:
        return self.spectral.unstable_basis.copy()

    def stable_frame(self) -> np.ndarray:
        return self.spectral.stable_basis.copy()

    def base_apply(self, x: np.ndarray) -> np.ndarray:
        return (self._lin @ np.asarray(x, dtype=float) + self._trans) % 1.0

    def base_apply_inv(self, x: np.ndarray) -> np.ndarray:
        return (self._lin_inv @ (np.asarray(x, dtype=float) - self._trans)) % 1.0

    # Exact rational orbit iteration. Floating-point orbits of a hyperbolic
    # map amplify rounding noise exponentially (forward in the unstable
    # directions, backward in the stable one), which would poison long
    # adjustment series; rationalized points iterate exactly and their
    # denominators never grow because the matrix is integral.

    @staticmethod
    def rationalize(x) -> tuple[Fraction, ...]:
        return tuple(
            (v if isinstance(v, Fraction) else Fraction(float(v))) % 1 for v in x
        )

    def base_apply_exact(self, pt: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        ent = self.base.entries
        return tuple(
            (sum(ent[i][j] * pt[j] for j in range(self.dim)) + self.translation[i]) % 1
            for i in range(self.dim)
        )

    def base_apply_inv_exact(self, pt: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        inv = self._inv_entries
        shifted = tuple(pt[j] - self.translation[j] for j in range(self.dim))
        return tuple(
            sum(inv[i][j] * shifted[j] for j in range(self.dim)) % 1
            for i in range(self.dim)
        )

    def birkhoff_exact(self, x, n: int, backward: bool = False) -> float:
        """Roof Birkhoff sum along the exact rational orbit of x.

        Forward: sum_{k=0}^{n-1} roof(F^k x). Backward: sum_{k=1}^{n}
        roof(F^-k x).
        """
        pt = self.rationalize(x)
        total = 0.0
        if backward:
            for _ in range(n):
                pt = self.base_apply_inv_exact(pt)
                total += self.roof(pt)
        else:
            for _ in range(n):
                total += self.roof(pt)
                pt = self.base_apply_exact(pt)
        return total

    def split_displacement(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Decompose a base displacement into (unstable part, stable part)."""
        coords = self._frame_inv @ np.asarray(v, dtype=float)
        vu = self._frame[:, : self._n_u] @ coords[: self._n_u]
        vs = self._frame[:, self._n_u:] @ coords[self._n_u:]
        return vu, vs

    # -- points and the flow ---------------------------------------------------

    def make_point(self, x, s: float = 0.0) -> FlowPoint:
        """Normalize (x, s) into the fundamental domain."""
        xa = np.asarray([float(v) for v in x], dtype=float) % 1.0
        s = float(s)
        r = self.roof(xa)
        guard = 0
        while s >= r:
            s -= r
            xa = self.base_apply(xa)
            r = self.roof(xa)
            guard += 1
            if guard > 10**7:
                raise ArithmeticError("normalization did not terminate")
        while s < 0.0:
            xa = self.base_apply_inv(xa)
            r = self.roof(xa)
            s += r
            guard += 1
            if guard > 10**7:
                raise ArithmeticError("normalization did not terminate")
        return FlowPoint(x=tuple(xa), s=s)

    def evolve(self, p: FlowPoint, t: float) -> FlowPoint:
        """Flow for time t, crossing the roof as often as needed."""
        if abs(t) > 1e6:
            raise ValueError("|t| must be at most 1e6")
        return self.make_point(p.x, p.s + t)

    def distance(self, p: FlowPoint, q: FlowPoint) -> float:
        """Fundamental-domain metric: max of base torus distance and fiber gap.

        Both points are also compared through one roof crossing either way,
        so points straddling the identification measure as close.
        """
        def variants(pt: FlowPoint):
            x = pt.base()
            yield x, pt.s
            yield self.base_apply(x), pt.s - self.roof(x)
            xb = self.base_apply_inv(x)
            yield xb, pt.s + self.roof(xb)

        best = np.inf
        for xa, sa in variants(p):
            for xb, sb in variants(q):
                d = max(
                    float(np.linalg.norm(wrap_unit(xa - xb))),
                    abs(sa - sb),
                )
                best = min(best, d)
        return best

    # -- leaf machinery ----------------------------------------------------------

    def _leaf_direction(self, v: np.ndarray) -> str:
        vu, vs = self.split_displacement(v)
        nu, ns = np.linalg.norm(vu), np.linalg.norm(vs)
        if nu <= _LEAF_TOL and ns <= _LEAF_TOL:
            return "zero"
        if nu <= _LEAF_TOL:
            return "stable"
        if ns <= _LEAF_TOL:
            return "unstable"
        raise OffLeaf(
            f"displacement has unstable part {nu:.2e} and stable part {ns:.2e}"
        )

    def time_adjustment(self, x, y, direction: str) -> float:
        """Fiber offset putting (y, offset) on the strong leaf of (x, 0).

        stable:   offset = sum_{n>=0} roof(L^n y) - roof(L^n x); forward flow
                  distance between (x, 0) and (y, offset) then tends to 0.
        unstable: offset = sum_{n>=1} roof(L^-n x) - roof(L^-n y), the
                  backward-asymptotic analogue.
        """
        xa = np.asarray([float(v) for v in x], dtype=float) % 1.0
        ya = np.asarray([float(v) for v in y], dtype=float) % 1.0
        delta = wrap_unit(ya - xa)
        if direction not in ("stable", "unstable"):
            raise ValueError("direction must be 'stable' or 'unstable'")
        vu, vs = self.split_displacement(delta)
        transverse = np.linalg.norm(vu if direction == "stable" else vs)
        if transverse > _LEAF_TOL:
            raise OffLeaf(
                f"{direction} adjustment needs a {direction} displacement; "
                f"transverse part {transverse:.2e}"
            )
        if np.linalg.norm(delta) == 0.0:
            return 0.0
        poly = self.roof.poly
        if poly.is_constant():
            return 0.0
        lip = poly.lipschitz_bound()
        moduli = self.spectral.moduli
        if direction == "stable":
            step = self._lin
            proj = self._proj_s
            rate = max(m for m in moduli if m < 1.0)
            point = self.rationalize(xa)
            advance = self.base_apply_exact
            sign = 1.0
        else:
            step = self._lin_inv
            proj = self._proj_u
            rate = 1.0 / min(m for m in moduli if m > 1.0)
            point = self.base_apply_inv_exact(self.rationalize(xa))
            delta = proj @ (step @ delta)
            advance = self.base_apply_inv_exact
            sign = -1.0
        delta = proj @ delta
        total = 0.0
        for n in range(_MAX_TERMS):
            total += sign * poly.eval_diff(point, delta)
            point = advance(point)
            # re-project each step: the leaf displacement is invariant under
            # the base map, and projection stops float noise in the
            # complementary (expanding) subspace from compounding
            delta = proj @ (step @ delta)
            gap = float(np.linalg.norm(delta))
            # geometric tail certificate: remaining terms sum below threshold
            if lip * gap / max(1.0 - rate, 1e-12) < _TERM_BOUND:
                return total
        raise ArithmeticError("adjustment series did not meet its term bound")

    def strong_manifold_point(self, p: FlowPoint, v) -> FlowPoint:
        """Point of W^s(p) or W^u(p) displaced by the base vector v."""
        varr = np.asarray([float(c) for c in v], dtype=float)
        if np.linalg.norm(varr) > self.chart_radius + 1e-12:
            raise OffLeaf(
                f"displacement norm {np.linalg.norm(varr):.3g} exceeds chart radius"
            )
        direction = self._leaf_direction(varr)
        if direction == "zero":
            return p
        offset = self.time_adjustment(p.base(), p.base() + varr, direction)
        return self.make_point(p.base() + varr, p.s + offset)

    # -- exports -----------------------------------------------------------------

    def trajectory_rows(self, p: FlowPoint, times) -> list[list]:
        rows = []
        for t in times:
            q = self.evolve(p, float(t))
            rows.append([float(t), *[float(c) for c in q.x], float(q.s)])
        return rows


def trajectory_csv_header(dim: int) -> list[str]:
    return ["t", *[f"x{i + 1}" for i in range(dim)], "s"]
