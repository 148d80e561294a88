"""Roof functions and the periods-of-periodic-orbits criterion.

Roofs are real trigonometric polynomials on the d-torus. Keeping them in
closed form gives exact gradients, exact frequency bookkeeping under the
base map, and honest truncation control in the frequency-space coboundary
solver. Periodic points of the base automorphism are enumerated exactly in
rational arithmetic, so orbit averages of the roof (the periodic
obstructions) carry no enumeration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import intlinalg
from .errors import NonHyperbolicPeriod, ObstructionNonzero, TruncationInsufficient
from .spectral import IntegerMatrix, spectral_data

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# trigonometric polynomials


class TrigPolynomial:
    """Finite Fourier sum sum_k c_k e^{2 pi i k.x} with c_{-k} = conj(c_k).

    Immutable; `terms` maps integer frequency tuples to complex
    coefficients and always contains both members of each +-k pair.
    """

    __slots__ = ("dim", "terms", "_freqs", "_coeffs")

    def __init__(self, dim: int, terms: dict):
        if dim < 1:
            raise ValueError("dimension must be positive")
        clean: dict[tuple[int, ...], complex] = {}
        for k, c in terms.items():
            k = tuple(int(v) for v in k)
            if len(k) != dim:
                raise ValueError(f"frequency {k} does not match dimension {dim}")
            c = complex(c)
            if c != 0:
                clean[k] = clean.get(k, 0.0 + 0.0j) + c
        for k, c in clean.items():
            neg = tuple(-v for v in k)
            if neg not in clean or abs(clean[neg] - c.conjugate()) > 1e-13 * max(1.0, abs(c)):
                raise ValueError(f"terms are not Hermitian-symmetric at frequency {k}")
        self.dim = dim
        self.terms = dict(sorted(clean.items()))
        self._freqs = np.array(list(self.terms.keys()), dtype=float).reshape(-1, dim)
        self._coeffs = np.array(list(self.terms.values()), dtype=complex)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(value: float, dim: int) -> "TrigPolynomial":
        return TrigPolynomial(dim, {(0,) * dim: complex(value)})

    @staticmethod
    def cosine(amplitude: float, freq, dim: int) -> "TrigPolynomial":
        """amplitude * cos(2 pi k.x)"""
        k = tuple(int(v) for v in freq)
        if not any(k):
            return TrigPolynomial.constant(amplitude, dim)
        neg = tuple(-v for v in k)
        half = 0.5 * amplitude
        return TrigPolynomial(dim, {k: complex(half), neg: complex(half)})

    @staticmethod
    def sine(amplitude: float, freq, dim: int) -> "TrigPolynomial":
        """amplitude * sin(2 pi k.x)"""
        k = tuple(int(v) for v in freq)
        if not any(k):
            return TrigPolynomial(dim, {})
        neg = tuple(-v for v in k)
        half = complex(0.0, -0.5 * amplitude)
        return TrigPolynomial(dim, {k: half, neg: half.conjugate()})

    # -- algebra -------------------------------------------------------------

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0 + 0.0j) + c
        return TrigPolynomial(self.dim, terms)

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + (other * -1.0)

    def __mul__(self, scalar: float) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def compose_matrix(self, matrix: IntegerMatrix) -> "TrigPolynomial":
        """Exact composition p(M x): frequency k moves to M^T k."""
        mt = tuple(zip(*matrix.entries))
        return TrigPolynomial(
            self.dim,
            {intlinalg.mat_vec(mt, k): c for k, c in self.terms.items()},
        )

    def shift(self, v) -> "TrigPolynomial":
        """p(x - v); coefficients pick up the phase e^{-2 pi i k.v}."""
        varr = np.array([float(x) for x in v])
        return TrigPolynomial(
            self.dim,
            {
                k: c * complex(np.exp(-1j * TWO_PI * float(np.dot(k, varr))))
                for k, c in self.terms.items()
            },
        )

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, x) -> float:
        xarr = np.asarray([float(v) for v in x], dtype=float) % 1.0
        phases = np.exp(1j * TWO_PI * (self._freqs @ xarr))
        return float(np.real(self._coeffs @ phases))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (N, d) array of points."""
        pts = np.asarray(points, dtype=float) % 1.0
        out = np.zeros(pts.shape[0])
        for chunk in range(0, pts.shape[0], 131072):
            sl = slice(chunk, chunk + 131072)
            phases = np.exp(1j * TWO_PI * (pts[sl] @ self._freqs.T))
            out[sl] = np.real(phases @ self._coeffs)
        return out

    def gradient(self, x) -> np.ndarray:
        xarr = np.asarray([float(v) for v in x], dtype=float) % 1.0
        phases = np.exp(1j * TWO_PI * (self._freqs @ xarr))
        return np.real((1j * TWO_PI * self._freqs.T) @ (self._coeffs * phases))

    def eval_diff(self, x, delta) -> float:
        """p(x + delta) - p(x), accurate to machine precision in the gap.

        Uses e^{i a}(e^{i b} - 1) with the small factor computed from
        sin/cos of b directly, so tiny stable-leaf gaps do not cancel.
        """
        xarr = np.asarray([float(v) for v in x], dtype=float) % 1.0
        darr = np.asarray([float(v) for v in delta], dtype=float)
        theta = TWO_PI * (self._freqs @ xarr)
        beta = TWO_PI * (self._freqs @ darr)
        expm1 = -2.0 * np.sin(0.5 * beta) ** 2 + 1j * np.sin(beta)
        phases = np.exp(1j * theta) * expm1
        return float(np.real(self._coeffs @ phases))

    def gradient_diff(self, x, delta) -> np.ndarray:
        """grad p(x + delta) - grad p(x) with the same pairing trick."""
        xarr = np.asarray([float(v) for v in x], dtype=float) % 1.0
        darr = np.asarray([float(v) for v in delta], dtype=float)
        theta = TWO_PI * (self._freqs @ xarr)
        beta = TWO_PI * (self._freqs @ darr)
        expm1 = -2.0 * np.sin(0.5 * beta) ** 2 + 1j * np.sin(beta)
        weights = self._coeffs * np.exp(1j * theta) * expm1
        return np.real((1j * TWO_PI * self._freqs.T) @ weights)

    # -- bounds and bookkeeping ----------------------------------------------

    @property
    def max_abs_freq(self) -> int:
        if not self.terms:
            return 0
        return max(max(abs(v) for v in k) for k in self.terms)

    def lipschitz_bound(self) -> float:
        return float(
            sum(abs(c) * TWO_PI * math.sqrt(sum(v * v for v in k))
                for k, c in self.terms.items())
        )

    def gradient_lipschitz_bound(self) -> float:
        return float(
            sum(abs(c) * (TWO_PI ** 2) * sum(v * v for v in k)
                for k, c in self.terms.items())
        )

    def is_constant(self) -> bool:
        return all(all(v == 0 for v in k) for k in self.terms)

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"k": list(k), "re": c.real, "im": c.imag}
                for k, c in self.terms.items()
            ],
        }

    @staticmethod
    def from_json_dict(payload: dict) -> "TrigPolynomial":
        terms = {
            tuple(t["k"]): complex(t["re"], t["im"]) for t in payload["terms"]
        }
        return TrigPolynomial(int(payload["dim"]), terms)

    def __repr__(self) -> str:
        return f"TrigPolynomial(dim={self.dim}, n_terms={len(self.terms)})"


# ---------------------------------------------------------------------------
# certified-positive roofs


def _grid_axes(dim: int) -> list[np.ndarray]:
    sizes = [256 if i < 2 else 32 for i in range(dim)]
    return [np.arange(n) / n for n in sizes]


@dataclass(frozen=True)
class RoofFunction:
    """Positive trig polynomial; positivity certified by grid + Lipschitz slack."""

    poly: TrigPolynomial
    positivity_margin: float

    def __init__(self, poly: TrigPolynomial):
        if poly.is_constant():
            value = float(sum(c.real for c in poly.terms.values()))
            margin = value
        else:
            axes = _grid_axes(poly.dim)
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=1)
            gmin = float(poly.evaluate_many(pts).min())
            half_diag = 0.5 * math.sqrt(sum((1.0 / len(ax)) ** 2 for ax in axes))
            margin = gmin - poly.lipschitz_bound() * half_diag
        if margin <= 0:
            raise ValueError(f"roof not certified positive (margin {margin:.3g})")
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "positivity_margin", float(margin))

    @property
    def dim(self) -> int:
        return self.poly.dim

    def __call__(self, x) -> float:
        return self.poly.evaluate(x)

    def mean(self) -> float:
        return float(self.poly.terms.get((0,) * self.dim, 0.0).real)

    @staticmethod
    def constant(value: float, dim: int) -> "RoofFunction":
        return RoofFunction(TrigPolynomial.constant(value, dim))


# ---------------------------------------------------------------------------
# periodic orbits, exactly


@dataclass(frozen=True)
class PeriodicOrbitRecord:
    """One orbit of the base automorphism, exact rational base points."""

    base_points: tuple[tuple[Fraction, ...], ...]
    period_n: int
    flow_period: float | None = None

    def representative(self) -> tuple[Fraction, ...]:
        return min(self.base_points)


def _mod1(fr: Fraction) -> Fraction:
    return fr - (fr.numerator // fr.denominator)


def _apply_mod1(matrix: IntegerMatrix, point: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    image = intlinalg.mat_vec(matrix.entries, point)
    return tuple(_mod1(Fraction(v)) for v in image)


def periodic_points(
    matrix: IntegerMatrix, n: int, roof: RoofFunction | None = None
) -> list[PeriodicOrbitRecord]:
    """All orbits through points with M^n x = x on the torus.

    Solves (M^n - I) x in Z^d by unimodular diagonalization, so the points
    are exact rationals and their count is |det(M^n - I)|. Orbits are
    sorted by (period, representative); when a roof is supplied each record
    carries the orbit's flow period (Birkhoff sum of the roof).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    dmat = intlinalg.mat_sub(matrix.power(n), intlinalg.identity(matrix.dim))
    count = abs(intlinalg.det(dmat))
    if count == 0:
        raise NonHyperbolicPeriod(f"det(M^{n} - I) = 0")
    _, s, v = intlinalg.unimodular_diagonalize(dmat)
    diag = [s[i][i] for i in range(matrix.dim)]

    points = set()
    idx = [0] * matrix.dim
    while True:
        w = [Fraction(idx[i], diag[i]) for i in range(matrix.dim)]
        x = tuple(
            _mod1(sum(Fraction(v[i][j]) * w[j] for j in range(matrix.dim)))
            for i in range(matrix.dim)
        )
        points.add(x)
        for pos in range(matrix.dim):
            idx[pos] += 1
            if idx[pos] < diag[pos]:
                break
            idx[pos] = 0
        else:
            break
    if len(points) != count:
        raise ArithmeticError(
            f"enumerated {len(points)} points but |det(M^n - I)| = {count}"
        )

    orbits = []
    remaining = set(points)
    while remaining:
        start = min(remaining)
        cycle = [start]
        nxt = _apply_mod1(matrix, start)
        while nxt != start:
            cycle.append(nxt)
            nxt = _apply_mod1(matrix, nxt)
        for p in cycle:
            remaining.discard(p)
        flow = None
        if roof is not None:
            flow = float(sum(roof(p) for p in cycle))
            if flow <= 0:
                raise ArithmeticError("flow period must be positive")
        orbits.append(
            PeriodicOrbitRecord(
                base_points=tuple(cycle), period_n=len(cycle), flow_period=flow
            )
        )
    orbits.sort(key=lambda o: (o.period_n, o.representative()))
    return orbits


def birkhoff_sum(roof: RoofFunction, matrix: IntegerMatrix, x, n: int) -> float:
    """sum_{k<n} roof(M^k x), evaluated along the exact or float orbit."""
    if n < 1:
        raise ValueError("n must be at least 1")
    exact = all(isinstance(v, Fraction) for v in x)
    total = 0.0
    point = tuple(x)
    for _ in range(n):
        total += roof(point)
        if exact:
            point = _apply_mod1(matrix, point)
        else:
            arr = np.asarray([float(v) for v in point])
            point = tuple((np.array(matrix.entries, dtype=float) @ arr) % 1.0)
    return total


# ---------------------------------------------------------------------------
# periodic obstructions and the coboundary criterion


@dataclass(frozen=True)
class ObstructionReport:
    orbits: tuple[PeriodicOrbitRecord, ...]
    averages: tuple[float, ...]
    spread: float


def periodic_obstructions(
    roof: RoofFunction, matrix: IntegerMatrix, n_max: int
) -> ObstructionReport:
    """Orbit averages flow_period / period for every orbit of period <= n_max.

    A roof cohomologous to a constant has all averages equal; the spread
    (max - min) is the computable obstruction.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    seen: dict[tuple, PeriodicOrbitRecord] = {}
    for n in range(1, n_max + 1):
        for rec in periodic_points(matrix, n, roof=roof):
            key = rec.representative()
            if key not in seen:
                seen[key] = rec
    orbits = sorted(seen.values(), key=lambda o: (o.period_n, o.representative()))
    averages = tuple(o.flow_period / o.period_n for o in orbits)
    spread = float(max(averages) - min(averages)) if averages else 0.0
    return ObstructionReport(orbits=tuple(orbits), averages=averages, spread=spread)


def obstruction_csv_rows(report: ObstructionReport) -> list[list]:
    rows = []
    for orbit, avg in zip(report.orbits, report.averages):
        repr_str = ";".join(
            "/".join([str(fr.numerator), str(fr.denominator)])
            for fr in orbit.representative()
        )
        rows.append([orbit.period_n, repr_str, float(avg)])
    return rows


OBSTRUCTION_CSV_HEADER = ["period_n", "orbit_repr", "average"]


@dataclass(frozen=True)
class CoboundarySolution:
    """Solution data for roof = c + u o M - u, truncated in frequency."""

    constant_c: float
    transfer_u: TrigPolynomial
    residual_sup: float
    obstruction_spread: float


def _weyl_grid(dim: int, n: int) -> np.ndarray:
    # deterministic equidistributed test points (Weyl sequence on primes)
    primes = [2, 3, 5, 7, 11][:dim]
    steps = np.sqrt(np.array(primes, dtype=float))
    idx = np.arange(1, n + 1)[:, None]
    return (idx * steps[None, :]) % 1.0


def _orbit_segment(start, tmat, tmat_inv, proj_s, proj_u, support_radius):
    """Walk the frequency orbit of `start` under M^T far enough both ways.

    Backward steps expand the stable component, forward steps the unstable
    one, so once either projection clears twice the support radius no
    further support frequencies can occur in that direction.
    """
    def proj_norm(vec, proj):
        return float(np.linalg.norm(proj @ np.asarray(vec, dtype=float)))

    segment = [tuple(start)]
    k = tuple(start)
    for _ in range(400):
        k = intlinalg.mat_vec(tmat_inv, k)
        segment.insert(0, tuple(k))
        if proj_norm(k, proj_s) > 2.0 * support_radius + 1.0:
            break
    else:
        raise ArithmeticError("backward frequency walk did not escape")
    k = tuple(start)
    for _ in range(400):
        k = intlinalg.mat_vec(tmat, k)
        segment.append(tuple(k))
        if proj_norm(k, proj_u) > 2.0 * support_radius + 1.0:
            break
    else:
        raise ArithmeticError("forward frequency walk did not escape")
    return segment


def solve_coboundary(
    roof: RoofFunction,
    matrix: IntegerMatrix,
    trunc: int,
    obstruction_tol: float = 1e-8,
    obstruction_n_max: int = 6,
) -> CoboundarySolution:
    """Solve u o M - u = roof - c in frequency space.

    The constant c is the mean of the roof. Each nonzero frequency orbit of
    M^T carries a telescoping one-sided sum; truncation keeps frequencies
    with max-norm <= trunc. The residual is re-evaluated on an independent
    equidistributed grid, never taken from the solver's own bookkeeping.
    """
    poly = roof.poly
    if trunc < poly.max_abs_freq:
        raise ValueError("trunc must cover the roof's frequency support")
    report = periodic_obstructions(roof, matrix, obstruction_n_max)
    if report.spread > obstruction_tol:
        raise ObstructionNonzero(
            f"periodic averages spread {report.spread:.3g} exceeds {obstruction_tol:.1g}"
        )

    solution_terms = _telescope_terms(poly, matrix, trunc)
    u = TrigPolynomial(poly.dim, solution_terms)
    c = roof.mean()
    resid = _independent_residual(u, poly, matrix, c)
    if resid > 1e-9:
        terms2 = _telescope_terms(poly, matrix, 2 * trunc)
        resid2 = _independent_residual(TrigPolynomial(poly.dim, terms2), poly, matrix, c)
        if resid2 > 0.5 * resid:
            raise TruncationInsufficient(
                f"residual {resid:.3g} does not improve with doubled cutoff ({resid2:.3g})"
            )
    return CoboundarySolution(
        constant_c=c,
        transfer_u=u,
        residual_sup=resid,
        obstruction_spread=report.spread,
    )


def _telescope_terms(poly: TrigPolynomial, matrix: IntegerMatrix, trunc: int) -> dict:
    tmat = tuple(zip(*matrix.entries))
    tmat_inv = tuple(zip(*matrix.inverse_entries()))
    tdata = spectral_data(IntegerMatrix(tmat))
    d = poly.dim
    basis = np.hstack([tdata.stable_basis, tdata.unstable_basis])
    binv = np.linalg.inv(basis)
    n_s = tdata.stable_basis.shape[1]
    proj_s = basis[:, :n_s] @ binv[:n_s, :]
    proj_u = basis[:, n_s:] @ binv[n_s:, :]

    support = [k for k in poly.terms if any(k)]
    if not support:
        return {}
    radius = max(float(np.linalg.norm(np.asarray(k, dtype=float))) for k in support)

    solution: dict[tuple[int, ...], complex] = {}
    visited: set[tuple[int, ...]] = set()
    for k0 in sorted(support):
        if k0 in visited:
            continue
        segment = _orbit_segment(k0, tmat, tmat_inv, proj_s, proj_u, radius)
        seg_set = set(segment)
        visited |= seg_set & set(support)
        b = [poly.terms.get(k, 0.0 + 0.0j) for k in segment]
        total = sum(b)
        scale = max(abs(poly.terms[k]) for k in support)
        if abs(total) > 1e-9 * scale:
            raise ObstructionNonzero(
                f"frequency orbit through {k0} has nonzero telescoping sum {abs(total):.3g}"
            )
        # a_j = -(b_0 + ... + b_j) solves a_{j-1} - a_j = b_j with decay at
        # both ends of the orbit
        acc = 0.0 + 0.0j
        for k, bk in zip(segment, b):
            acc += bk
            val = -acc
            if val != 0 and max(abs(v) for v in k) <= trunc:
                solution[k] = solution.get(k, 0.0 + 0.0j) + val
    _ = d
    return solution


def _independent_residual(
    u: TrigPolynomial, roof_poly: TrigPolynomial, matrix: IntegerMatrix, c: float
) -> float:
    pts = _weyl_grid(roof_poly.dim, 4096)
    um = u.compose_matrix(matrix)
    vals = um.evaluate_many(pts) - u.evaluate_many(pts) - (roof_poly.evaluate_many(pts) - c)
    return float(np.max(np.abs(vals)))


def is_constant_roof_equivalent(
    roof: RoofFunction, matrix: IntegerMatrix, n_max: int = 6, tol: float = 1e-8
) -> bool:
    """True when every periodic orbit average agrees to within tol."""
    return periodic_obstructions(roof, matrix, n_max).spread <= tol
