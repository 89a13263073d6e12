"""Finite surrogates of the synthesis map x -> sum_k x_k psi_k and its inverse."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HypothesisError, SpecError

__all__ = [
    "BasisSpec",
    "identity_basis",
    "orthonormal_basis",
    "random_orthonormal_basis",
    "embedded_basis",
    "load_basis_csv",
    "synthesize",
    "coordinates",
    "in_range",
    "pushforward_om",
    "transport_shift_density",
]

ORTHO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """Basis vectors psi_k as the columns of an (M, N) matrix.

    ``M == N`` for a basis of the surrogate space; ``M > N`` embeds the
    coordinate space as a proper subspace, so points off the range exist.
    """

    kind: str
    matrix: np.ndarray
    isometry_certified: bool

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]


def _orthonormal_columns(Q: np.ndarray) -> bool:
    G = Q.T @ Q
    return bool(np.max(np.abs(G - np.eye(Q.shape[1]))) <= ORTHO_TOL * max(1, Q.shape[1]))


def identity_basis(M: int) -> BasisSpec:
    return BasisSpec("identity", np.eye(M), True)


def orthonormal_basis(Q, require: bool = True) -> BasisSpec:
    Q = np.array(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] < Q.shape[1]:
        raise SpecError("basis matrix must be M x N with M >= N")
    ok = _orthonormal_columns(Q)
    if require and not ok:
        raise SpecError("basis columns are not orthonormal to 1e-12")
    kind = "orthonormal-matrix" if Q.shape[0] == Q.shape[1] else "embedded"
    return BasisSpec(kind if ok else "general", Q, ok)


def random_orthonormal_basis(M: int, seed: int) -> BasisSpec:
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((M, M)))
    Q = Q * np.sign(np.diag(R))
    return orthonormal_basis(Q)


def embedded_basis(M: int, N: int) -> BasisSpec:
    """First N standard unit vectors of R^M."""
    if N > M:
        raise SpecError("cannot embed N > M coordinates")
    return BasisSpec("embedded", np.eye(M)[:, :N], True)


def load_basis_csv(path) -> BasisSpec:
    """Read a comma separated matrix (columns are basis vectors) and validate it."""
    Q = np.loadtxt(path, delimiter=",", ndmin=2)
    return orthonormal_basis(Q)


def synthesize(basis: BasisSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != basis.N:
        raise SpecError(f"expected {basis.N} coordinates, got {x.shape[0]}")
    return basis.matrix @ x


def coordinates(basis: BasisSpec, z) -> np.ndarray:
    """Left inverse of :func:`synthesize` (transpose for orthonormal columns)."""
    z = np.asarray(z, dtype=float)
    if z.shape[0] != basis.M:
        raise SpecError(f"expected a vector of length {basis.M}, got {z.shape[0]}")
    if basis.isometry_certified:
        return basis.matrix.T @ z
    return np.linalg.pinv(basis.matrix) @ z


def in_range(basis: BasisSpec, z, tol: float = 1e-10) -> bool:
    z = np.asarray(z, dtype=float)
    resid = z - synthesize(basis, coordinates(basis, z))
    return bool(np.linalg.norm(resid) <= tol * max(1.0, float(np.linalg.norm(z))))


def pushforward_om(om: Callable[[np.ndarray], float], basis: BasisSpec) -> Callable[[np.ndarray], float]:
    """Functional ``z -> om(T z)`` on the range of the synthesis map, ``+inf`` off it.

    Only isometric synthesis maps transport OM functionals; others are refused.
    """
    if not basis.isometry_certified:
        raise HypothesisError("synthesis map is not an isometry; OM functionals do not transport")

    def om_z(z):
        if not in_range(basis, z):
            return math.inf
        return om(coordinates(basis, z))

    return om_z


def transport_shift_density(log_r: Callable[[np.ndarray, np.ndarray], float], basis: BasisSpec
                            ) -> Callable[[np.ndarray, np.ndarray], float]:
    """``log r_h(z) = log r_{T h}(T z)`` for the pushed-forward measure.

    This identity also holds for non-isometric bases; it is exposed as a plain
    pass-through.
    """
    def log_r_z(h, z):
        return log_r(coordinates(basis, h), coordinates(basis, z))

    return log_r_z
