"""Small shared numerics: subspace geometry, deterministic parallel map, report IO."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy.linalg


def orthonormalize(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) for the column span of `basis`."""
    q = scipy.linalg.orth(np.asarray(basis, dtype=float))
    return q


def principal_angles(basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
    """Principal angles (radians, ascending) between two column-span subspaces."""
    qa = orthonormalize(basis_a)
    qb = orthonormalize(basis_b)
    sv = scipy.linalg.svd(qa.T @ qb, compute_uv=False)
    sv = np.clip(sv, -1.0, 1.0)
    return np.sort(np.arccos(sv))


def subspace_distance(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """Largest principal angle; a metric on the Grassmannian of equal dimensions."""
    return float(principal_angles(basis_a, basis_b).max(initial=0.0))


def contains_subspace(big: np.ndarray, small: np.ndarray, tol: float = 1e-8) -> bool:
    """True when every column of `small` lies within `tol` of span(big).

    Distance is measured as the residual norm of the unit vector after
    projecting onto span(big).
    """
    q = orthonormalize(big)
    for col in np.asarray(small, dtype=float).T:
        v = col / np.linalg.norm(col)
        resid = v - q @ (q.T @ v)
        if np.linalg.norm(resid) > tol:
            return False
    return True


def kernel_basis(rows: np.ndarray, rel_cutoff: float = 1e-9) -> np.ndarray:
    """Null-space basis (columns) of a stack of row covectors.

    Rank is decided by singular values relative to the largest one; an
    all-zero stack has full-dimensional kernel.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[1]
    _, sv, vt = scipy.linalg.svd(rows)
    if sv.size == 0 or sv[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sv > rel_cutoff * sv[0]))
    return vt[rank:].T.copy() if rank < n else np.zeros((n, 0))


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map preserving input order; results are identical for any worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def format_float(x: float) -> str:
    """Shortest round-trip decimal form; keeps report files byte-stable."""
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = [format_float(c) if isinstance(c, float) else str(c) for c in row]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
