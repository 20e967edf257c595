"""Analytic signal models on R^d with exact Fourier transforms and quadrature.

Signals form an immutable expression tree.  Every node evaluates pointwise in
closed form (Sampled nodes interpolate band-limitedly) and knows its own
Fourier transform, built from the standard operator rules:

    F(M_w0 T_x0 f) = e^{2 pi i x0.w0} M_{-x0} T_{w0} (F f)
    F(U_lam f)     = U_{1/lam} (F f)
    F(conj f)      = conj((F f)(-.))          F(f(-.)) = (F f)(-.)

with the convention F f(w) = \int e^{-2 pi i x.w} f(x) dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite

from .errors import OutOfRange, TailTooFat, TailTooFatWarning

import warnings


def _points(t, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize a point or batch of points to shape (N, dim)."""
    a = np.asarray(t, dtype=float)
    if dim == 1:
        if a.ndim == 0:
            return a.reshape(1, 1), True
        if a.ndim == 1:
            # either a single d=1 point written as [t] or a batch of scalars
            if a.shape == (1,):
                return a.reshape(1, 1), True
            return a.reshape(-1, 1), False
        if a.ndim == 2 and a.shape[1] == 1:
            return a, False
        raise ValueError(f"bad point shape {a.shape} for dim=1")
    if a.ndim == 1 and a.shape == (dim,):
        return a.reshape(1, dim), True
    if a.ndim == 2 and a.shape[1] == dim:
        return a, False
    raise ValueError(f"bad point shape {a.shape} for dim={dim}")


def _vec(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 1 and dim > 1:
        v = np.full(dim, v[0])
    if v.size != dim:
        raise ValueError(f"expected a length-{dim} vector, got {x!r}")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-d grid: points start + k*step, k = 0..count-1."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least 2 points")
        if not self.step > 0:
            raise ValueError("grid step must be positive")

    @property
    def stop(self) -> float:
        """Exclusive upper edge, start + count*step."""
        return self.start + self.count * self.step

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def span(self) -> float:
        return self.count * self.step


@dataclass(frozen=True)
class QuadratureConfig:
    """Truncation radius, per-dim sample count and boundary tolerance for all
    integral evaluations (composite midpoint rule on [-R, R]^d)."""

    radius: float = 8.0
    samples_per_dim: int = 4096
    tail_tol: float = 1e-10

    def __post_init__(self):
        if self.radius <= 0 or self.samples_per_dim < 2 or self.tail_tol <= 0:
            raise ValueError("invalid quadrature configuration")

    @property
    def step(self) -> float:
        return 2.0 * self.radius / self.samples_per_dim

    @property
    def nodes(self) -> np.ndarray:
        """Midpoint nodes on [-R, R]."""
        k = np.arange(self.samples_per_dim)
        return -self.radius + (k + 0.5) * self.step

    @classmethod
    def default(cls, dim: int) -> "QuadratureConfig":
        if dim <= 1:
            return cls()
        return cls(samples_per_dim=256)


class Signal:
    """Base node of the signal expression tree."""

    dim: int = 1

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        pts, single = _points(t, self.dim)
        out = self._eval(pts)
        return complex(out[0]) if single else out

    def fourier(self) -> "Signal":
        raise NotImplementedError

    # -- combinators -------------------------------------------------------

    def shift(self, x=0.0, omega=0.0) -> "Signal":
        """M_omega T_x self."""
        return TFShift(self, x, omega)

    def dilate(self, lam: float) -> "Signal":
        return Dilate(self, lam)

    def conjugate(self) -> "Signal":
        return Conjugate(self)

    def reflect(self) -> "Signal":
        return Reflect(self)

    def involution(self) -> "Signal":
        """f*(t) = conj(f(-t))."""
        return Conjugate(Reflect(self))

    def scaled(self, c) -> "Signal":
        return Sum(((complex(c), self),))


@dataclass(frozen=True)
class Gaussian(Signal):
    """phi_lam(t) = exp(-pi |t|^2 / lam)."""

    lam: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("Gaussian width must be positive")

    def _eval(self, pts):
        return np.exp(-np.pi * np.sum(pts * pts, axis=1) / self.lam) + 0j

    def fourier(self):
        # phi_lam -> lam^{d/2} phi_{1/lam}
        return Gaussian(1.0 / self.lam, self.dim).scaled(self.lam ** (self.dim / 2.0))

    def norm2(self) -> float:
        """Exact L2 norm, (lam/2)^{d/4}."""
        return (self.lam / 2.0) ** (self.dim / 4.0)


@dataclass(frozen=True)
class Hermite(Signal):
    """H_n(sqrt(2 pi) t) exp(-pi t^2): Fourier eigenfunction with eigenvalue
    (-i)^n.  Not L2-normalized; Hermite(0) is the standard Gaussian."""

    n: int = 0
    dim: int = field(init=False, default=1)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("Hermite order must be nonnegative")

    def _eval(self, pts):
        t = pts[:, 0]
        return eval_hermite(self.n, math.sqrt(2.0 * math.pi) * t) * np.exp(
            -np.pi * t * t
        ) + 0j

    def fourier(self):
        return self.scaled((-1j) ** self.n)

    def norm2(self) -> float:
        """Exact L2 norm: (2^n n! / sqrt(2))^{1/2}."""
        return math.sqrt(2.0**self.n * math.factorial(self.n) / math.sqrt(2.0))


@dataclass(frozen=True)
class WindowedTone(Signal):
    """exp(2 pi i w0.t) on the box prod_j [a_j, b_j], zero outside."""

    interval: tuple  # ((a1, b1), ..., (ad, bd)); a single (a, b) means d=1
    freq: tuple = 0.0
    dim: int = field(init=False)

    def __post_init__(self):
        iv = np.asarray(self.interval, dtype=float)
        if iv.ndim == 1:
            iv = iv.reshape(1, 2)
        if iv.ndim != 2 or iv.shape[1] != 2 or np.any(iv[:, 1] <= iv[:, 0]):
            raise ValueError("interval must be (a, b) pairs with a < b")
        d = iv.shape[0]
        object.__setattr__(self, "interval", tuple(map(tuple, iv)))
        object.__setattr__(self, "freq", tuple(_vec(self.freq, d)))
        object.__setattr__(self, "dim", d)

    def _eval(self, pts):
        iv = np.asarray(self.interval)
        inside = np.all((pts >= iv[:, 0]) & (pts <= iv[:, 1]), axis=1)
        phase = np.exp(2j * np.pi * pts @ np.asarray(self.freq))
        return np.where(inside, phase, 0.0)

    def fourier(self):
        return BoxSpectrum(self.interval, self.freq)


@dataclass(frozen=True)
class BoxSpectrum(Signal):
    """Closed-form Fourier transform of WindowedTone: per dimension
    (b-a) sinc((w-w0)(b-a)) e^{-pi i (w-w0)(a+b)} with sinc(u)=sin(pi u)/(pi u)."""

    interval: tuple
    freq: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", len(self.interval))

    def _eval(self, pts):
        out = np.ones(pts.shape[0], dtype=complex)
        for j, (a, b) in enumerate(self.interval):
            nu = pts[:, j] - self.freq[j]
            width = b - a
            out *= width * np.sinc(nu * width) * np.exp(-1j * np.pi * nu * (a + b))
        return out

    def fourier(self):
        # F^2 = parity
        return Reflect(WindowedTone(self.interval, self.freq))


@dataclass(frozen=True)
class TFShift(Signal):
    """M_omega T_x inner: t -> e^{2 pi i t.omega} inner(t - x)."""

    inner: Signal
    x: tuple = 0.0
    omega: tuple = 0.0
    dim: int = field(init=False)

    def __post_init__(self):
        d = self.inner.dim
        object.__setattr__(self, "x", tuple(_vec(self.x, d)))
        object.__setattr__(self, "omega", tuple(_vec(self.omega, d)))
        object.__setattr__(self, "dim", d)

    def _eval(self, pts):
        phase = np.exp(2j * np.pi * pts @ np.asarray(self.omega))
        return phase * self.inner._eval(pts - np.asarray(self.x))

    def fourier(self):
        x = np.asarray(self.x)
        w = np.asarray(self.omega)
        c = np.exp(2j * np.pi * float(x @ w))
        return TFShift(self.inner.fourier(), x=w, omega=-x).scaled(c)


@dataclass(frozen=True)
class Dilate(Signal):
    """U_lam inner: t -> |lam|^{d/2} inner(lam t), lam != 0."""

    inner: Signal
    lam: float
    dim: int = field(init=False)

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("dilation factor must be nonzero")
        object.__setattr__(self, "dim", self.inner.dim)

    def _eval(self, pts):
        norm = abs(self.lam) ** (self.dim / 2.0)
        return norm * self.inner._eval(self.lam * pts)

    def fourier(self):
        return Dilate(self.inner.fourier(), 1.0 / self.lam)


@dataclass(frozen=True)
class Conjugate(Signal):
    inner: Signal
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.inner.dim)

    def _eval(self, pts):
        return np.conj(self.inner._eval(pts))

    def fourier(self):
        return Conjugate(Reflect(self.inner.fourier()))


@dataclass(frozen=True)
class Reflect(Signal):
    inner: Signal
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.inner.dim)

    def _eval(self, pts):
        return self.inner._eval(-pts)

    def fourier(self):
        return Reflect(self.inner.fourier())


@dataclass(frozen=True, eq=False)
class LinearArg(Signal):
    """inner(Q t) for an invertible d x d matrix Q (no normalization factor)."""

    inner: Signal
    q: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        if q.shape != (self.inner.dim, self.inner.dim):
            raise ValueError("LinearArg matrix shape mismatch")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "dim", self.inner.dim)

    def _eval(self, pts):
        return self.inner._eval(pts @ self.q.T)

    def fourier(self):
        # F(f(Q.))(w) = |det Q|^{-1} (F f)(Q^{-T} w)
        det = abs(float(np.linalg.det(self.q)))
        qsharp = np.linalg.inv(self.q).T
        return LinearArg(self.inner.fourier(), qsharp).scaled(1.0 / det)


@dataclass(frozen=True)
class Sum(Signal):
    """Finite linear combination sum_k c_k f_k."""

    terms: tuple  # ((complex, Signal), ...)
    dim: int = field(init=False)

    def __post_init__(self):
        terms = tuple((complex(c), s) for c, s in self.terms)
        if not terms:
            raise ValueError("Sum needs at least one term")
        d = terms[0][1].dim
        if any(s.dim != d for _, s in terms):
            raise ValueError("Sum terms must share dimension")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "dim", d)

    def _eval(self, pts):
        out = np.zeros(pts.shape[0], dtype=complex)
        for c, s in self.terms:
            out += c * s._eval(pts)
        return out

    def fourier(self):
        return Sum(tuple((c, s.fourier()) for c, s in self.terms))


@dataclass(frozen=True, eq=False)
class Sampled(Signal):
    """d=1 signal known through samples on a uniform grid.

    Evaluation uses periodic band-limited (trigonometric) interpolation; the
    Fourier transform is the step-scaled DFT on the reciprocal grid.
    """

    grid: Grid1D
    values: np.ndarray
    dim: int = field(init=False, default=1)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.count,):
            raise ValueError("value count must match the grid")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _eval(self, pts):
        t = pts[:, 0]
        g = self.grid
        lo, hi = g.start, g.start + (g.count - 1) * g.step
        pad = 0.5 * g.step + 1e-12 * g.span
        if np.any(t < lo - pad) or np.any(t > hi + pad):
            raise OutOfRange(
                f"sampled signal evaluated outside [{lo}, {hi}]"
            )
        n = g.count
        # periodic interpolation kernel on integer offsets s = (t - t_j)/step
        s = (t[:, None] - g.points[None, :]) / g.step
        with np.errstate(divide="ignore", invalid="ignore"):
            if n % 2 == 0:
                ker = np.sin(np.pi * s) / (n * np.tan(np.pi * s / n))
            else:
                ker = np.sin(np.pi * s) / (n * np.sin(np.pi * s / n))
        ker = np.where(np.isclose(s % n, 0.0, atol=1e-9) | np.isclose(s % n, float(n), atol=1e-9), 1.0, ker)
        return ker @ self.values

    def fourier(self):
        g = self.grid
        n = g.count
        freqs = np.fft.fftshift(np.fft.fftfreq(n, d=g.step))
        spec = np.fft.fftshift(np.fft.fft(self.values))
        # continuous normalization: step * sum v_j e^{-2 pi i nu t_j}
        spec = g.step * spec * np.exp(-2j * np.pi * freqs * g.start)
        return Sampled(Grid1D(float(freqs[0]), float(freqs[1] - freqs[0]), n), spec)


def sample(f: Signal, grid: Grid1D) -> Sampled:
    """Sample a d=1 signal on a uniform grid."""
    if f.dim != 1:
        raise ValueError("sample() supports d=1 signals")
    return Sampled(grid, f(grid.points))


# -- quadrature ------------------------------------------------------------


def _product_nodes(q: QuadratureConfig, dim: int) -> np.ndarray:
    """Midpoint nodes of [-R, R]^dim, shape (N^dim, dim)."""
    axes = [q.nodes] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def _boundary_mask(q: QuadratureConfig, dim: int) -> np.ndarray:
    n = q.samples_per_dim
    idx = np.arange(n)
    edge = (idx == 0) | (idx == n - 1)
    if dim == 1:
        return edge
    mesh = np.meshgrid(*([edge] * dim), indexing="ij")
    out = np.zeros_like(mesh[0])
    for m in mesh:
        out |= m
    return out.reshape(-1)


def check_tail(boundary_max: float, q: QuadratureConfig, allow_truncation: bool = False):
    """Raise (or warn, when truncation is allowed) on fat integrand tails."""
    if boundary_max > q.tail_tol:
        msg = (
            f"integrand magnitude {boundary_max:.3e} at radius {q.radius} "
            f"exceeds tail tolerance {q.tail_tol:.1e}"
        )
        if allow_truncation:
            warnings.warn(msg, TailTooFatWarning)
        else:
            raise TailTooFat(msg)


def inner_product(f: Signal, g: Signal, q: QuadratureConfig | None = None,
                  allow_truncation: bool = False) -> complex:
    """<f, g> = int f conj(g), conjugate-linear in g (composite midpoint)."""
    if f.dim != g.dim:
        raise ValueError("signals must share dimension")
    q = q or QuadratureConfig.default(f.dim)
    pts = _product_nodes(q, f.dim)
    vals = f._eval(pts) * np.conj(g._eval(pts))
    check_tail(float(np.abs(vals[_boundary_mask(q, f.dim)]).max()), q, allow_truncation)
    return complex(vals.sum() * q.step**f.dim)


def norm2(f: Signal, q: QuadratureConfig | None = None) -> float:
    return math.sqrt(max(inner_product(f, f, q).real, 0.0))


def stft(f: Signal, g: Signal, x, omega, q: QuadratureConfig | None = None) -> complex:
    """V_g f(x, omega) = <f, M_omega T_x g>."""
    return inner_product(f, TFShift(g, x, omega), q)


# -- JSON descriptions ------------------------------------------------------


def signal_from_json(doc) -> Signal:
    """Build a signal from its JSON description (see README for the schema)."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError("signal description must be an object with a 'kind'")
    kind = doc["kind"].lower()
    if kind in ("gaussian", "gauss"):
        return Gaussian(float(doc.get("lambda", 1.0)), int(doc.get("dim", 1)))
    if kind == "hermite":
        return Hermite(int(doc["n"]))
    if kind == "tone":
        return WindowedTone(doc["interval"], doc.get("freq", 0.0))
    if kind == "tfshift":
        return TFShift(signal_from_json(doc["inner"]), doc.get("x", 0.0), doc.get("omega", 0.0))
    if kind == "dilate":
        return Dilate(signal_from_json(doc["inner"]), float(doc["lambda"]))
    if kind == "conjugate":
        return Conjugate(signal_from_json(doc["inner"]))
    if kind == "reflect":
        return Reflect(signal_from_json(doc["inner"]))
    if kind == "sum":
        terms = tuple(
            (complex(re, im), signal_from_json(inner)) for re, im, inner in doc["terms"]
        )
        return Sum(terms)
    if kind == "sampled":
        grid = Grid1D(float(doc["start"]), float(doc["step"]), len(doc["values"]))
        vals = np.array([complex(re, im) for re, im in doc["values"]])
        return Sampled(grid, vals)
    raise ValueError(f"unknown signal kind {doc['kind']!r}")
