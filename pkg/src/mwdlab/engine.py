"""Phase-space fields B_A(f, g) on rectangular grids.

Two evaluation paths compute the oscillatory integral

    B_A(f, g)(x, w) = int e^{-2 pi i w.y} f(A11 x + A12 y) conj g(A21 x + A22 y) dy

from midpoint samples of the y-integrand: `mwd` sums the quadrature directly
on the requested (x, w) grid, `mwd_fft` applies a step-scaled FFT along y and
returns values on the canonical reciprocal frequency grid (optionally sliced
back onto the requested w axes when they align).  Both paths share the same
y nodes, so they agree to rounding on shared points.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import blockmat as bm
from .errors import GridTooLarge, OscillationGuard, SingularMatrix
from .signals import QuadratureConfig, Grid1D, Signal, check_tail

GRID_CAP = 2**22
OSC_GUARD = 0.25


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular (x, w) grid: one Grid1D per dimension on each side."""

    x_axes: tuple
    w_axes: tuple

    def __post_init__(self):
        xa = tuple(self.x_axes) if isinstance(self.x_axes, (tuple, list)) else (self.x_axes,)
        wa = tuple(self.w_axes) if isinstance(self.w_axes, (tuple, list)) else (self.w_axes,)
        if len(xa) != len(wa) or not xa:
            raise ValueError("x and w need one axis per dimension")
        object.__setattr__(self, "x_axes", xa)
        object.__setattr__(self, "w_axes", wa)
        if self.total_points > GRID_CAP:
            raise GridTooLarge(f"{self.total_points} points exceed cap {GRID_CAP}")

    @property
    def dim(self) -> int:
        return len(self.x_axes)

    @property
    def x_shape(self) -> tuple:
        return tuple(a.count for a in self.x_axes)

    @property
    def w_shape(self) -> tuple:
        return tuple(a.count for a in self.w_axes)

    @property
    def total_points(self) -> int:
        return int(np.prod(self.x_shape, dtype=np.int64) * np.prod(self.w_shape, dtype=np.int64))

    def x_points(self) -> np.ndarray:
        """All x grid points, shape (prod(x_shape), dim)."""
        return _mesh_points([a.points for a in self.x_axes])

    def w_points(self) -> np.ndarray:
        return _mesh_points([a.points for a in self.w_axes])

    @property
    def x_cell(self) -> float:
        return float(np.prod([a.step for a in self.x_axes]))

    @property
    def w_cell(self) -> float:
        return float(np.prod([a.step for a in self.w_axes]))


def _mesh_points(axes_pts) -> np.ndarray:
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def grid1d(start: float, stop: float, count: int) -> Grid1D:
    """Uniform axis with inclusive start, exclusive stop."""
    return Grid1D(float(start), (float(stop) - float(start)) / int(count), int(count))


def square_grid(lo: float, hi: float, count: int, dim: int = 1) -> PhaseSpaceGrid:
    ax = grid1d(lo, hi, count)
    return PhaseSpaceGrid((ax,) * dim, (ax,) * dim)


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """Complex field samples over a PhaseSpaceGrid.

    `values` is indexed (x-index, w-index) row-major; multi-dimensional
    grids flatten each side in C order (see values_nd for the cube view).
    """

    grid: PhaseSpaceGrid
    values: np.ndarray

    def __post_init__(self):
        nx = int(np.prod(self.grid.x_shape))
        nw = int(np.prod(self.grid.w_shape))
        v = np.asarray(self.values, dtype=complex)
        if v.shape == self.grid.x_shape + self.grid.w_shape:
            v = v.reshape(nx, nw)
        if v.shape != (nx, nw):
            raise ValueError(f"value shape {v.shape} does not match grid ({nx}, {nw})")
        object.__setattr__(self, "values", v)

    @property
    def values_nd(self) -> np.ndarray:
        return self.values.reshape(self.grid.x_shape + self.grid.w_shape)


# -- guards ------------------------------------------------------------------


def _require_invertible(a: bm.BlockMatrix):
    if not bm.is_invertible(a.full):
        raise SingularMatrix("transform matrix is numerically singular")


def check_oscillation(q: QuadratureConfig, w_axes) -> None:
    """The y step must resolve e^{-2 pi i w.y} at the largest |w| per dim."""
    h = q.step
    for ax in w_axes:
        wmax = max(abs(ax.start), abs(ax.start + (ax.count - 1) * ax.step))
        if h * wmax > OSC_GUARD + 1e-12:
            raise OscillationGuard(
                f"y-step {h:.4g} under-resolves |w|={wmax:.4g} "
                f"(need h*|w| <= {OSC_GUARD})"
            )


def _n_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("MWDLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


# -- integrand sampling ------------------------------------------------------


def _y_nodes(q: QuadratureConfig, dim: int) -> np.ndarray:
    axes = [q.nodes] * dim
    return _mesh_points(axes)


def _integrand_rows(a: bm.BlockMatrix, f: Signal, g: Signal, xs: np.ndarray,
                    ynodes: np.ndarray) -> np.ndarray:
    """Sample f(A11 x + A12 y) conj g(A21 x + A22 y) for a chunk of x rows.

    xs: (cx, d), ynodes: (ny, d) -> (cx, ny) complex.
    """
    cx, d = xs.shape
    ny = ynodes.shape[0]
    p1 = (xs @ a.a11.T)[:, None, :] + (ynodes @ a.a12.T)[None, :, :]
    p2 = (xs @ a.a21.T)[:, None, :] + (ynodes @ a.a22.T)[None, :, :]
    vf = f._eval(p1.reshape(-1, d)).reshape(cx, ny)
    vg = g._eval(p2.reshape(-1, d)).reshape(cx, ny)
    return vf * np.conj(vg)


def _boundary_mask_nd(q: QuadratureConfig, dim: int) -> np.ndarray:
    n = q.samples_per_dim
    edge = np.zeros(n, dtype=bool)
    edge[0] = edge[-1] = True
    if dim == 1:
        return edge
    mesh = np.meshgrid(*([edge] * dim), indexing="ij")
    out = np.zeros_like(mesh[0])
    for m in mesh:
        out |= m
    return out.reshape(-1)


# -- direct quadrature path ---------------------------------------------------


def mwd(a: bm.BlockMatrix, f: Signal, g: Signal | None = None,
        grid: PhaseSpaceGrid | None = None, q: QuadratureConfig | None = None,
        *, allow_truncation: bool = False, threads: int | None = None) -> PhaseSpaceField:
    """B_A(f, g) by direct midpoint quadrature on the requested grid."""
    g = g if g is not None else f
    if grid is None:
        raise ValueError("mwd needs a grid")
    d = grid.dim
    if f.dim != d or g.dim != d:
        raise ValueError("signal dimension does not match the grid")
    _require_invertible(a)
    q = q or QuadratureConfig.default(d)
    check_oscillation(q, grid.w_axes)

    ynodes = _y_nodes(q, d)
    bmask = _boundary_mask_nd(q, d)
    xs = grid.x_points()
    ws = grid.w_points()
    nx, nw, ny = xs.shape[0], ws.shape[0], ynodes.shape[0]
    hvol = q.step**d

    # chunk sizes keep the (cx, ny) and (cw, ny) buffers bounded
    cx = max(1, min(nx, (1 << 21) // ny))
    cwch = max(1, min(nw, (1 << 21) // ny))
    w_chunks = [(j, min(j + cwch, nw)) for j in range(0, nw, cwch)]
    # precompute the y-phase blocks when they fit; recompute per chunk otherwise
    cache_phases = nw * ny <= (1 << 24)
    phase_blocks = (
        [np.exp(-2j * np.pi * (ws[j0:j1] @ ynodes.T)) for j0, j1 in w_chunks]
        if cache_phases
        else None
    )

    out = np.empty((nx, nw), dtype=complex)
    starts = list(range(0, nx, cx))
    tails = [0.0] * len(starts)

    def run_chunk(ci):
        i0 = starts[ci]
        i1 = min(i0 + cx, nx)
        rows = _integrand_rows(a, f, g, xs[i0:i1], ynodes)
        tails[ci] = float(np.abs(rows[:, bmask]).max())
        for wi, (j0, j1) in enumerate(w_chunks):
            if phase_blocks is not None:
                ph = phase_blocks[wi]
            else:
                ph = np.exp(-2j * np.pi * (ws[j0:j1] @ ynodes.T))
            out[i0:i1, j0:j1] = rows @ ph.T

    nthreads = _n_threads(threads)
    if nthreads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(run_chunk, range(len(starts))))
    else:
        for ci in range(len(starts)):
            run_chunk(ci)

    out *= hvol
    check_tail(max(tails), q, allow_truncation)
    return PhaseSpaceField(grid, out)


def mwd_row(a: bm.BlockMatrix, f: Signal, g: Signal, x, ws: np.ndarray,
            q: QuadratureConfig | None = None, *, allow_truncation: bool = False) -> np.ndarray:
    """B_A(f, g)(x, w) over many w at a single x (pointwise path)."""
    g = g if g is not None else f
    d = f.dim
    q = q or QuadratureConfig.default(d)
    x = np.asarray(x, dtype=float).reshape(1, d)
    ws = np.asarray(ws, dtype=float).reshape(-1, d)
    ynodes = _y_nodes(q, d)
    rows = _integrand_rows(a, f, g, x, ynodes)
    check_tail(float(np.abs(rows[:, _boundary_mask_nd(q, d)]).max()), q, allow_truncation)
    return (rows @ np.exp(-2j * np.pi * (ws @ ynodes.T)).T)[0] * q.step**d


def mwd_point(a: bm.BlockMatrix, f: Signal, g: Signal, x, w,
              q: QuadratureConfig | None = None, **kw) -> complex:
    return complex(mwd_row(a, f, g, x, np.asarray(w, dtype=float).reshape(1, -1), q, **kw)[0])


# -- FFT fast path ------------------------------------------------------------


def canonical_w_axis(q: QuadratureConfig) -> Grid1D:
    """Reciprocal frequency axis of the midpoint y-sampling: step 1/(N h)."""
    n = q.samples_per_dim
    delta = 1.0 / (n * q.step)
    return Grid1D(-(n // 2) * delta, delta, n)


def align_axis(requested: Grid1D, canonical: Grid1D,
               rtol: float = 1e-9) -> tuple[int, int] | None:
    """(offset, stride) such that requested.points == canonical[offset::stride],
    or None when the axes are incommensurate."""
    ratio = requested.step / canonical.step
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > rtol:
        return None
    off = (requested.start - canonical.start) / canonical.step
    offset = int(round(off))
    if abs(off - offset) > rtol or offset < 0:
        return None
    if offset + (requested.count - 1) * stride >= canonical.count:
        return None
    return offset, stride


def mwd_fft(a: bm.BlockMatrix, f: Signal, g: Signal | None = None,
            grid: PhaseSpaceGrid | None = None, q: QuadratureConfig | None = None,
            *, allow_truncation: bool = False, threads: int | None = None,
            restrict: bool = True) -> PhaseSpaceField:
    """B_A(f, g) via the partial Fourier transform of the sampled y-integrand.

    The w axes of the result are the canonical FFT frequency grid of the
    chosen y-sampling; when `restrict` is set and the requested w axes are a
    sub-lattice of it, the result is sliced onto them exactly.
    """
    g = g if g is not None else f
    if grid is None:
        raise ValueError("mwd_fft needs a grid")
    d = grid.dim
    _require_invertible(a)
    q = q or QuadratureConfig.default(d)
    check_oscillation(q, grid.w_axes)

    n = q.samples_per_dim
    canon = canonical_w_axis(q)
    selectors = None
    if restrict:
        aligned = [align_axis(ax, canon) for ax in grid.w_axes]
        if all(s is not None for s in aligned):
            selectors = aligned
    w_axes = tuple(grid.w_axes) if selectors else (canon,) * d
    out_grid = PhaseSpaceGrid(grid.x_axes, w_axes)

    ynodes = _y_nodes(q, d)
    bmask = _boundary_mask_nd(q, d)
    xs = grid.x_points()
    nx = xs.shape[0]
    y0 = float(q.nodes[0])
    # bin-offset twiddle: DFT bin j then carries frequency (j - n//2) * delta
    signs = np.exp(2j * np.pi * np.arange(n) * (n // 2) / n)
    # per-dim phase e^{-2 pi i w y0} on the canonical axis
    canon_phase = np.exp(-2j * np.pi * canon.points * y0)

    cx = max(1, min(nx, (1 << 21) // (n**d)))
    out = np.empty((nx, int(np.prod(out_grid.w_shape))), dtype=complex)
    starts = list(range(0, nx, cx))
    tails = [0.0] * len(starts)

    def run_chunk(ci):
        i0 = starts[ci]
        i1 = min(i0 + cx, nx)
        rows = _integrand_rows(a, f, g, xs[i0:i1], ynodes)
        tails[ci] = float(np.abs(rows[:, bmask]).max())
        cube = rows.reshape((i1 - i0,) + (n,) * d)
        # (-1)^k pre-twiddle maps DFT bin j onto frequency (j - N//2) * delta
        for ax in range(1, d + 1):
            shape = [1] * cube.ndim
            shape[ax] = n
            cube = cube * signs.reshape(shape)
        cube = np.fft.fftn(cube, axes=tuple(range(1, d + 1)))
        for ax in range(1, d + 1):
            shape = [1] * cube.ndim
            shape[ax] = n
            cube = cube * canon_phase.reshape(shape)
        if selectors:
            for ax, (offset, stride) in enumerate(selectors, start=1):
                count = grid.w_axes[ax - 1].count
                idx = offset + stride * np.arange(count)
                cube = np.take(cube, idx, axis=ax)
        out[i0:i1] = cube.reshape(i1 - i0, -1) * q.step**d

    nthreads = _n_threads(threads)
    if nthreads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(run_chunk, range(len(starts))))
    else:
        for ci in range(len(starts)):
            run_chunk(ci)

    check_tail(max(tails), q, allow_truncation)
    return PhaseSpaceField(out_grid, out)


def compute_field(a: bm.BlockMatrix, f: Signal, g: Signal | None = None,
                  grid: PhaseSpaceGrid | None = None, q: QuadratureConfig | None = None,
                  method: str = "auto", **kw) -> PhaseSpaceField:
    """Production entry: FFT path when the w axes align, direct otherwise."""
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "fft"):
        d = grid.dim
        qq = q or QuadratureConfig.default(d)
        canon = canonical_w_axis(qq)
        if all(align_axis(ax, canon) is not None for ax in grid.w_axes):
            return mwd_fft(a, f, g, grid, qq, **kw)
        if method == "fft":
            return mwd_fft(a, f, g, grid, qq, **kw)
    return mwd(a, f, g, grid, q, **kw)


# -- named specializations -----------------------------------------------------


def specialize(name: str, f: Signal, g: Signal | None = None,
               grid: PhaseSpaceGrid | None = None, q: QuadratureConfig | None = None,
               tau: float | None = None, **kw) -> PhaseSpaceField:
    """Field of a named distribution: wigner | tau | rihaczek | conj_rihaczek
    | stft | ambiguity."""
    d = grid.dim
    a = bm.named_matrix(name, d, tau=tau)
    return mwd(a, f, g, grid, q, **kw)


# -- marginals -----------------------------------------------------------------


def _trapezoid_nd(vals: np.ndarray, axes, steps) -> np.ndarray:
    for ax, step in sorted(zip(axes, steps), reverse=True):
        vals = np.trapezoid(vals, dx=step, axis=ax)
    return vals


def _check_field_tail(vals_nd: np.ndarray, axes, tol: float, allow: bool):
    mags = []
    for ax in axes:
        mags.append(float(np.abs(np.take(vals_nd, 0, axis=ax)).max()))
        mags.append(float(np.abs(np.take(vals_nd, -1, axis=ax)).max()))
    worst = max(mags)
    if worst > tol:
        msg = f"field magnitude {worst:.3e} at the integration boundary exceeds {tol:.1e}"
        if allow:
            warnings.warn(msg, UserWarning)
        else:
            from .errors import TailTooFat

            raise TailTooFat(msg)


def marginal_time(field: PhaseSpaceField, tail_tol: float = 1e-6,
                  allow_truncation: bool = False) -> np.ndarray:
    """Trapezoid integral over the w axes; for Cohen-type A this is |f(x)|^2."""
    d = field.grid.dim
    vals = field.values_nd
    w_axes = list(range(d, 2 * d))
    _check_field_tail(vals, w_axes, tail_tol, allow_truncation)
    return _trapezoid_nd(vals, w_axes, [a.step for a in field.grid.w_axes]).reshape(-1)


def marginal_freq(field: PhaseSpaceField, tail_tol: float = 1e-6,
                  allow_truncation: bool = False) -> np.ndarray:
    """Trapezoid integral over the x axes; for Cohen-type A this is |fhat(w)|^2."""
    d = field.grid.dim
    vals = field.values_nd
    x_axes = list(range(0, d))
    _check_field_tail(vals, x_axes, tail_tol, allow_truncation)
    return _trapezoid_nd(vals, x_axes, [a.step for a in field.grid.x_axes]).reshape(-1)


def total_mass(field: PhaseSpaceField) -> complex:
    steps = [a.step for a in field.grid.x_axes] + [a.step for a in field.grid.w_axes]
    return complex(_trapezoid_nd(field.values_nd, list(range(2 * field.grid.dim)), steps))


# -- field Fourier transforms ---------------------------------------------------


def _recip_axis(ax: Grid1D) -> Grid1D:
    delta = 1.0 / (ax.count * ax.step)
    return Grid1D(-(ax.count // 2) * delta, delta, ax.count)


def _axis_dft(vals: np.ndarray, ax_idx: int, ax: Grid1D, sign: int) -> tuple[np.ndarray, Grid1D]:
    """One-axis continuous-normalized DFT:
    out[m] = step * sum_k v[k] e^{sign * 2 pi i xi_m t_k} on the reciprocal axis."""
    n = ax.count
    recip = _recip_axis(ax)
    shape = [1] * vals.ndim
    shape[ax_idx] = n
    # pre-twiddle: bin m of the plain DFT then carries (m - n//2) * delta
    signs = np.exp(sign * (-2j) * np.pi * np.arange(n) * (n // 2) / n).reshape(shape)
    v = vals * signs
    if sign < 0:
        v = np.fft.fft(v, axis=ax_idx)
    else:
        v = np.fft.ifft(v, axis=ax_idx) * n
    phase = np.exp(sign * 2j * np.pi * recip.points * ax.start).reshape(shape)
    return v * phase * ax.step, recip


def _axis_idft(vals: np.ndarray, ax_idx: int, recip: Grid1D, orig: Grid1D, sign: int) -> np.ndarray:
    """Exact inverse of _axis_dft with the same sign convention."""
    n = orig.count
    shape = [1] * vals.ndim
    shape[ax_idx] = n
    phase = np.exp(sign * 2j * np.pi * recip.points * orig.start).reshape(shape)
    v = vals / phase / orig.step
    if sign < 0:
        v = np.fft.ifft(v, axis=ax_idx)
    else:
        v = np.fft.fft(v, axis=ax_idx) / n
    signs = np.exp(sign * (-2j) * np.pi * np.arange(n) * (n // 2) / n).reshape(shape)
    return v / signs


def field_fourier(field: PhaseSpaceField) -> PhaseSpaceField:
    """Continuous-normalized 2d-dim Fourier transform, sampled on the
    reciprocal grid: FF(xi, eta) = int F(x, w) e^{-2 pi i (x.xi + w.eta)}."""
    d = field.grid.dim
    vals = field.values_nd
    new_x, new_w = [], []
    for i, ax in enumerate(field.grid.x_axes):
        vals, rec = _axis_dft(vals, i, ax, -1)
        new_x.append(rec)
    for i, ax in enumerate(field.grid.w_axes):
        vals, rec = _axis_dft(vals, d + i, ax, -1)
        new_w.append(rec)
    return PhaseSpaceField(PhaseSpaceGrid(tuple(new_x), tuple(new_w)), vals)


def field_fourier_inverse(spec: PhaseSpaceField, grid: PhaseSpaceGrid) -> PhaseSpaceField:
    """Invert field_fourier back onto the original grid (exact round trip)."""
    d = grid.dim
    vals = spec.values_nd
    for i, ax in enumerate(grid.x_axes):
        vals = _axis_idft(vals, i, spec.grid.x_axes[i], ax, -1)
    for i, ax in enumerate(grid.w_axes):
        vals = _axis_idft(vals, d + i, spec.grid.w_axes[i], ax, -1)
    return PhaseSpaceField(grid, vals)


def field_symplectic_fourier(field: PhaseSpaceField) -> PhaseSpaceField:
    """F_sigma F(xi, eta) = F F(eta, -xi): transform x forward against eta,
    w backward against xi, then swap the two axis blocks.

    An exact involution for DFT-centered axes (start = -(count//2) * step).
    """
    d = field.grid.dim
    vals = field.values_nd
    eta_axes, xi_axes = [], []
    for i, ax in enumerate(field.grid.x_axes):
        vals, rec = _axis_dft(vals, i, ax, -1)
        eta_axes.append(rec)
    for i, ax in enumerate(field.grid.w_axes):
        vals, rec = _axis_dft(vals, d + i, ax, +1)
        xi_axes.append(rec)
    perm = list(range(d, 2 * d)) + list(range(0, d))
    vals = np.transpose(vals, perm)
    return PhaseSpaceField(PhaseSpaceGrid(tuple(xi_axes), tuple(eta_axes)), vals)
