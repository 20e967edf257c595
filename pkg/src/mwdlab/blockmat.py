"""Block algebra for the 2d x 2d transform matrices.

A transform matrix is stored as four d x d blocks so that every formula
written in terms of A11..A22 maps directly onto a field access.  All values
are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .errors import SingularMatrix

# relative pivot threshold below which a matrix counts as singular
PIVOT_RTOL = 1e-12


def _as_square(a, d=None):
    m = np.asarray(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if d is not None and m.shape[0] != d:
        raise ValueError(f"expected dimension {d}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.flags.writeable = False
    return m


def is_invertible(m) -> bool:
    """Pivot test: smallest LU pivot must exceed PIVOT_RTOL x largest entry."""
    m = np.asarray(m, dtype=float)
    scale = np.abs(m).max()
    if scale == 0.0:
        return False
    try:
        lu, _ = lu_factor(m, check_finite=False)
    except Exception:
        return False
    pivots = np.abs(np.diag(lu))
    return bool(pivots.min() > PIVOT_RTOL * scale)


def invert_square(m):
    """Inverse of a d x d matrix, guarded by the pivot test."""
    m = np.asarray(m, dtype=float)
    if not is_invertible(m):
        raise SingularMatrix(f"matrix is numerically singular:\n{m}")
    return np.linalg.inv(m)


@dataclass(frozen=True)
class BlockMatrix:
    """2d x 2d real matrix stored as four d x d blocks."""

    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        a11 = _as_square(self.a11)
        d = a11.shape[0]
        object.__setattr__(self, "a11", a11)
        object.__setattr__(self, "a12", _as_square(self.a12, d))
        object.__setattr__(self, "a21", _as_square(self.a21, d))
        object.__setattr__(self, "a22", _as_square(self.a22, d))
        object.__setattr__(self, "dim", d)

    @property
    def full(self) -> np.ndarray:
        """The assembled 2d x 2d array (derived view, row blocks stacked)."""
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])

    @classmethod
    def from_full(cls, m) -> "BlockMatrix":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"expected a 2d x 2d array, got shape {m.shape}")
        d = m.shape[0] // 2
        return cls(m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:])

    def det(self) -> float:
        """Signed determinant of the full matrix."""
        return float(np.linalg.det(self.full))

    def __matmul__(self, other: "BlockMatrix") -> "BlockMatrix":
        return BlockMatrix.from_full(self.full @ other.full)

    def transpose(self) -> "BlockMatrix":
        return BlockMatrix(self.a11.T, self.a21.T, self.a12.T, self.a22.T)

    def __neg__(self) -> "BlockMatrix":
        return BlockMatrix(-self.a11, -self.a12, -self.a21, -self.a22)

    def allclose(self, other: "BlockMatrix", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.full - other.full)) <= tol)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.dim,
                "A11": self.a11.tolist(),
                "A12": self.a12.tolist(),
                "A21": self.a21.tolist(),
                "A22": self.a22.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "BlockMatrix":
        doc = json.loads(text)
        d = int(doc["d"])
        return cls(
            _as_square(doc["A11"], d),
            _as_square(doc["A12"], d),
            _as_square(doc["A21"], d),
            _as_square(doc["A22"], d),
        )


def invert(a: BlockMatrix) -> BlockMatrix:
    """LU-based inverse of the full 2d x 2d matrix."""
    m = a.full
    if not is_invertible(m):
        raise SingularMatrix("block matrix is numerically singular")
    return BlockMatrix.from_full(np.linalg.inv(m))


def sharp(a: BlockMatrix) -> BlockMatrix:
    """A# = (A^-1)^T = (A^T)^-1."""
    return invert(a).transpose()


def is_right_regular(a: BlockMatrix) -> bool:
    """A12 and A22 both invertible."""
    return is_invertible(a.a12) and is_invertible(a.a22)


def is_left_regular(a: BlockMatrix) -> bool:
    """A11 and A21 both invertible."""
    return is_invertible(a.a11) and is_invertible(a.a21)


def identity(d: int) -> BlockMatrix:
    i = np.eye(d)
    z = np.zeros((d, d))
    return BlockMatrix(i, z, z, i)


def symplectic_j(d: int) -> BlockMatrix:
    """J = (0 I; -I 0), the canonical symplectic matrix."""
    i = np.eye(d)
    z = np.zeros((d, d))
    return BlockMatrix(z, i, -i, z)


def flip(d: int) -> BlockMatrix:
    """The coordinate swap (0 I; I 0)."""
    i = np.eye(d)
    z = np.zeros((d, d))
    return BlockMatrix(z, i, i, z)


def i2(d: int) -> BlockMatrix:
    """(I 0; 0 -I), the second-variable reflection."""
    i = np.eye(d)
    z = np.zeros((d, d))
    return BlockMatrix(i, z, z, -i)


def a_stft(d: int) -> BlockMatrix:
    """(0 I; -I I): realizes the short-time Fourier transform."""
    i = np.eye(d)
    z = np.zeros((d, d))
    return BlockMatrix(z, i, -i, i)


def a_ambiguity(d: int) -> BlockMatrix:
    """(I/2 I; -I/2 I): realizes the cross-ambiguity function."""
    i = np.eye(d)
    return BlockMatrix(0.5 * i, i, -0.5 * i, i)


def a_tau(tau: float, d: int) -> BlockMatrix:
    """(I tau*I; I -(1-tau)*I): the tau-family (tau=1/2 is Wigner)."""
    i = np.eye(d)
    return BlockMatrix(i, tau * i, i, -(1.0 - tau) * i)


def a_wigner(d: int) -> BlockMatrix:
    return a_tau(0.5, d)


def a_rihaczek(d: int) -> BlockMatrix:
    return a_tau(0.0, d)


def a_conj_rihaczek(d: int) -> BlockMatrix:
    return a_tau(1.0, d)


_NAMED = {
    "wigner": a_wigner,
    "rihaczek": a_rihaczek,
    "conj_rihaczek": a_conj_rihaczek,
    "stft": a_stft,
    "ambiguity": a_ambiguity,
    "identity": identity,
    "j": symplectic_j,
    "flip": flip,
    "i2": i2,
}


def named_matrix(name: str, d: int, tau: float | None = None) -> BlockMatrix:
    """Look up one of the named constant matrices; `tau` selects a_tau."""
    key = name.lower().replace("-", "_")
    if key == "tau":
        if tau is None:
            raise ValueError("matrix 'tau' needs a tau value")
        return a_tau(tau, d)
    if key not in _NAMED:
        raise ValueError(f"unknown matrix name {name!r}")
    return _NAMED[key](d)


@dataclass(frozen=True)
class CohenMatrix:
    """Perturbation matrix M with the derived transform data.

    a_m is (I M+I/2; I M-I/2), p_m is diag(-(M+I/2), M-I/2), s = I + 4 M^T M,
    and c_m = |det(M+I/2) det(M-I/2)| whenever a_m is right-regular.
    """

    m: np.ndarray
    a_m: BlockMatrix
    p_m: BlockMatrix
    s: np.ndarray
    c_m: float | None

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def right_regular(self) -> bool:
        return self.c_m is not None


def cohen_matrix(m) -> CohenMatrix:
    """Assemble the Cohen-type record for a perturbation matrix M."""
    m = _as_square(m)
    d = m.shape[0]
    i = np.eye(d)
    z = np.zeros((d, d))
    plus = m + 0.5 * i
    minus = m - 0.5 * i
    a_m = BlockMatrix(i, plus, i, minus)
    p_m = BlockMatrix(-plus, z, z, minus)
    s = i + 4.0 * (m.T @ m)
    c_m = None
    if is_invertible(plus) and is_invertible(minus):
        c_m = abs(float(np.linalg.det(plus) * np.linalg.det(minus)))
    return CohenMatrix(m=m, a_m=a_m, p_m=p_m, s=s, c_m=c_m)


def detect_cohen(a: BlockMatrix, tol: float = 1e-12) -> np.ndarray | None:
    """Return M when A has the Cohen block form (A11=A21=I, A12-A22=I)."""
    i = np.eye(a.dim)
    if (
        np.max(np.abs(a.a11 - i)) <= tol
        and np.max(np.abs(a.a21 - i)) <= tol
        and np.max(np.abs(a.a12 - a.a22 - i)) <= tol
    ):
        return a.a12 - 0.5 * i
    return None


def cohen_from_quadratic(u, v) -> CohenMatrix:
    """Cohen record for the quadratic form with off-diagonal blocks V (upper)
    and U (lower): the associated perturbation is M = U + V^T."""
    u = _as_square(u)
    v = _as_square(v, u.shape[0])
    return cohen_matrix(u + v.T)


def swap_matrix(a: BlockMatrix) -> BlockMatrix:
    """C = flip . A . i2 = (A21 -A22; A11 -A12), used when interchanging f,g."""
    return BlockMatrix(a.a21, -a.a22, a.a11, -a.a12)
