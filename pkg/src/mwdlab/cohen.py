"""Cohen-class specifics: chirp kernels, the characterization identity, the
Fourier-multiplier relation between two perturbations, and the Gaussian
closed form used as the quadrature oracle.

For A = A_M the distribution is a convolution of the Wigner transform with a
kernel theta_M whose symplectic Fourier transform is the unit-modulus chirp
chi_M(xi, eta) = e^{2 pi i eta.M xi}.  When M is invertible the kernel itself
is the chirp theta_M(x, w) = |det M|^{-1} e^{2 pi i x.M^{-1} w}; for M = 0 it
degenerates to the convolution identity (delta), and for singular nonzero M
only the Fourier side is represented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import blockmat as bm
from . import engine as en
from .errors import SingularKernel
from .signals import QuadratureConfig, Signal


@dataclass(frozen=True, eq=False)
class CohenKernel:
    """theta_M with its evaluation kind: chirp (M invertible), delta (M = 0),
    or singular (M singular but nonzero; pointwise values undefined)."""

    m: np.ndarray
    kind: str  # "chirp" | "delta" | "singular"
    m_inv: np.ndarray | None = None
    det_m: float = 0.0

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def theta(m) -> CohenKernel:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if np.all(m == 0.0):
        return CohenKernel(m, "delta")
    if not bm.is_invertible(m):
        return CohenKernel(m, "singular")
    return CohenKernel(m, "chirp", np.linalg.inv(m), float(np.linalg.det(m)))


def eval_theta(k: CohenKernel, x, w) -> np.ndarray | complex:
    """Pointwise chirp values |det M|^{-1} e^{2 pi i x.M^{-1} w}."""
    if k.kind != "chirp":
        raise SingularKernel(
            f"theta_M has no pointwise values for kind={k.kind!r}"
        )
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    scalar = x.ndim <= 1
    x = x.reshape(-1, k.dim)
    w = w.reshape(-1, k.dim)
    out = np.exp(2j * np.pi * np.sum(x * (w @ k.m_inv.T), axis=1)) / abs(k.det_m)
    return complex(out[0]) if scalar and out.size == 1 else out


def theta_hat(m, xi, eta) -> np.ndarray | complex:
    """Theta_M(xi, eta) = F theta_M = e^{-2 pi i xi.M eta} (any M)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    scalar = xi.ndim <= 1
    xi = xi.reshape(-1, m.shape[0])
    eta = eta.reshape(-1, m.shape[0])
    out = np.exp(-2j * np.pi * np.sum(xi * (eta @ m.T), axis=1))
    return complex(out[0]) if scalar and out.size == 1 else out


def chi(m, xi, eta) -> np.ndarray | complex:
    """chi_M(xi, eta) = F_sigma theta_M = e^{2 pi i eta.M xi} (any M)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    scalar = xi.ndim <= 1
    xi = xi.reshape(-1, m.shape[0])
    eta = eta.reshape(-1, m.shape[0])
    out = np.exp(2j * np.pi * np.sum(eta * (xi @ m.T), axis=1))
    return complex(out[0]) if scalar and out.size == 1 else out


def chi_on_grid(m, grid: en.PhaseSpaceGrid) -> np.ndarray:
    """chi_M sampled on a phase-space grid, shape (nx, nw)."""
    xs = grid.x_points()
    ws = grid.w_points()
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return np.exp(2j * np.pi * (ws @ m) @ xs.T).T


# -- Gaussian closed form -----------------------------------------------------


def gaussian_oracle(m, lam: float, x, w) -> np.ndarray | complex:
    """Closed form of B_{A_M} phi_lam at (x, w):

        (2 lam)^{d/2} det(S)^{-1/2} e^{-2 pi x^2/lam}
        e^{8 pi (M^T x . S^{-1} M^T x)/lam} e^{8 pi i S^{-1} w . M^T x}
        e^{-2 pi lam w.S^{-1} w},        S = I + 4 M^T M.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    d = m.shape[0]
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    scalar = x.ndim <= 1
    x = x.reshape(-1, d)
    w = w.reshape(-1, d)
    s = np.eye(d) + 4.0 * m.T @ m
    s_inv = np.linalg.inv(s)
    pref = (2.0 * lam) ** (d / 2.0) / np.sqrt(np.linalg.det(s))
    mtx = x @ m  # rows are M^T x
    quad_x = np.sum(x * x, axis=1)
    quad_mx = np.sum(mtx * (mtx @ s_inv.T), axis=1)
    cross = np.sum((w @ s_inv.T) * mtx, axis=1)
    quad_w = np.sum(w * (w @ s_inv.T), axis=1)
    out = (
        pref
        * np.exp(-2.0 * np.pi * quad_x / lam)
        * np.exp(8.0 * np.pi * quad_mx / lam)
        * np.exp(8j * np.pi * cross)
        * np.exp(-2.0 * np.pi * lam * quad_w)
    )
    return complex(out[0]) if scalar and out.size == 1 else out


def gaussian_oracle_sigma_form(m, lam: float, x, w) -> np.ndarray | complex:
    """Equivalent covariance form (2 lam)^{d/2} det(S)^{-1/2} e^{-pi z.Sigma z}
    with Sigma = ((2/lam) R^-1, -4i M S^-1; -4i S^-1 M^T, 2 lam S^-1) and the
    Woodbury identity R^-1 = (I + 4 M M^T)^-1 = I - 4 M S^-1 M^T."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    d = m.shape[0]
    x = np.asarray(x, dtype=float).reshape(-1, d)
    w = np.asarray(w, dtype=float).reshape(-1, d)
    s = np.eye(d) + 4.0 * m.T @ m
    s_inv = np.linalg.inv(s)
    r_inv = np.eye(d) - 4.0 * m @ s_inv @ m.T
    sigma = np.block(
        [
            [(2.0 / lam) * r_inv, -4j * m @ s_inv],
            [-4j * s_inv @ m.T, 2.0 * lam * s_inv],
        ]
    )
    z = np.hstack([x, w]).astype(complex)
    pref = (2.0 * lam) ** (d / 2.0) / np.sqrt(np.linalg.det(s))
    quad = np.sum(z * (z @ sigma.T), axis=1)
    out = pref * np.exp(-np.pi * quad)
    return out if out.size > 1 else complex(out[0])


def gaussian_oracle_field(m, lam: float, grid: en.PhaseSpaceGrid) -> en.PhaseSpaceField:
    xs = grid.x_points()
    ws = grid.w_points()
    vals = np.empty((xs.shape[0], ws.shape[0]), dtype=complex)
    for i, x in enumerate(xs):
        vals[i] = gaussian_oracle(m, lam, np.broadcast_to(x, ws.shape), ws)
    return en.PhaseSpaceField(grid, vals)


# -- characterization and multiplier relation ---------------------------------


def verify_characterization(m, f: Signal, g: Signal | None = None,
                            grid: en.PhaseSpaceGrid | None = None,
                            q: QuadratureConfig | None = None) -> dict:
    """Compare F_sigma B_{A_M}(f, g) against chi_M . Amb(f, g) pointwise.

    Both sides are computed independently: the left through the engine field
    and its symplectic Fourier transform, the right from a fresh ambiguity
    field on the reciprocal grid.  Returns a report with the sup discrepancy.
    """
    g = g if g is not None else f
    d = grid.dim
    cm = bm.cohen_matrix(m)
    field = en.mwd(cm.a_m, f, g, grid, q)
    left = en.field_symplectic_fourier(field)
    amb = en.mwd(bm.a_ambiguity(d), f, g, left.grid, q)
    right = chi_on_grid(cm.m, left.grid) * amb.values
    err = float(np.abs(left.values - right).max())
    return {
        "name": "cohen-characterization",
        "max_abs_error": err,
        "scale": float(np.abs(left.values).max()),
        "m": np.atleast_2d(np.asarray(m, dtype=float)).tolist(),
    }


def multiplier_relate(m1, m2, field1: en.PhaseSpaceField) -> en.PhaseSpaceField:
    """Map B_{A_M1}(f, g) onto B_{A_M2}(f, g) through the Fourier multiplier
    e^{-2 pi i xi.(M2 - M1) eta} applied to the field spectrum."""
    m1 = np.atleast_2d(np.asarray(m1, dtype=float))
    m2 = np.atleast_2d(np.asarray(m2, dtype=float))
    spec = en.field_fourier(field1)
    xs = spec.grid.x_points()  # xi
    ws = spec.grid.w_points()  # eta
    mult = np.exp(-2j * np.pi * xs @ ((m2 - m1) @ ws.T))
    out_spec = en.PhaseSpaceField(spec.grid, spec.values * mult)
    return en.field_fourier_inverse(out_spec, field1.grid)


# -- Theta conditions ----------------------------------------------------------


def check_theta_conditions(m, points, lam: float = 3.0, tol: float = 1e-12) -> dict:
    """Evaluate conditions (i)-(v) on Theta_M at the given (x, w) sample pairs:
    normalization on the axes, unit modulus, symmetry, additivity in each slot,
    and (lam, 1/lam) scaling invariance."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    d = m.shape[0]
    pts = np.asarray(points, dtype=float).reshape(-1, 2 * d)
    x, w = pts[:, :d], pts[:, d:]
    zeros = np.zeros_like(x)
    th = theta_hat

    errs = {
        "i_axes_one": float(
            max(
                np.abs(th(m, zeros, w) - 1.0).max(),
                np.abs(th(m, x, zeros) - 1.0).max(),
            )
        ),
        "ii_unit_modulus": float(np.abs(np.abs(th(m, x, w)) - 1.0).max()),
        "iii_symmetry": float(
            max(
                np.abs(th(m, -x, -w) - th(m, x, w)).max(),
                np.abs(np.conj(th(m, x, w)) - th(m, -x, w)).max(),
            )
        ),
        "iv_additivity": float(
            max(
                np.abs(th(m, x, w + w[::-1]) - th(m, x, w) * th(m, x, w[::-1])).max(),
                np.abs(th(m, x + x[::-1], w) - th(m, x, w) * th(m, x[::-1], w)).max(),
            )
        ),
        "v_scaling": float(np.abs(th(m, lam * x, w / lam) - th(m, x, w)).max()),
    }
    return {
        "name": "theta-conditions",
        "conditions": errs,
        "max_abs_error": max(errs.values()),
        "tolerance": tol,
        "passed": max(errs.values()) <= tol,
    }
