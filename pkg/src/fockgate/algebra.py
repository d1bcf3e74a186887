"""Image subalgebra of u(M), its orthonormalization and the perpendicular completion.

Skew-Hermitian matrices are handled through real coordinates in the canonical
orthonormal basis of u(M): ``i E_kk``, ``(i/sqrt2)(E_jk + E_kj)`` and
``(1/sqrt2)(E_jk - E_kj)`` for ``j < k``.  The map is an isometry for
``<u, v> = 1/2 tr(u^H v + v^H u)``, so inner products, Gram-Schmidt and
projections become ordinary real linear algebra on vectors of length M^2.
"""

from __future__ import annotations

import math
import struct
import threading
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import (
    CompletionCountMismatch,
    DimensionMismatch,
    FrameCacheError,
    FrameMismatch,
    RankDeficient,
)
from .fock_space import DEFAULT_CAP, FockBasis, enumerate_basis, ladder_pair_operator

GS_DROP_TOL = 1e-10
COMPLETION_TOL = 1e-8
_SQRT2 = np.sqrt(2.0)


def inner_product(u, v) -> float:
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    # 1/2 tr(u^H v + v^H u) = Re tr(u^H v)
    return float(np.vdot(u, v).real)


def is_skew_hermitian(v, tol=1e-10) -> bool:
    v = np.asarray(v)
    return v.ndim == 2 and v.shape[0] == v.shape[1] and np.max(np.abs(v + v.conj().T), initial=0.0) <= tol


def to_coords(v) -> np.ndarray:
    """Coordinates of skew-Hermitian matrices (shape ``(..., M, M)``) in the canonical basis."""
    v = np.asarray(v)
    M = v.shape[-1]
    iu = np.triu_indices(M, 1)
    upper = v[..., iu[0], iu[1]]
    diag = np.diagonal(v, axis1=-2, axis2=-1).imag
    return np.concatenate([diag, _SQRT2 * upper.imag, _SQRT2 * upper.real], axis=-1)


def from_coords(c, M: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    npair = M * (M - 1) // 2
    if c.shape[-1] != M * M:
        raise DimensionMismatch(f"coordinate vector of length {c.shape[-1]} for M={M}")
    out = np.zeros(c.shape[:-1] + (M, M), dtype=complex)
    idx = np.arange(M)
    out[..., idx, idx] = 1j * c[..., :M]
    iu = np.triu_indices(M, 1)
    upper = (c[..., M + npair :] + 1j * c[..., M : M + npair]) / _SQRT2
    out[..., iu[0], iu[1]] = upper
    out[..., iu[1], iu[0]] = -upper.conj()
    return out


@dataclass(frozen=True, eq=False)
class ImageBasis:
    """The m^2 generators i n_j, then e-type (k<j), then f-type (k<j)."""

    basis: FockBasis
    labels: tuple
    coords: np.ndarray

    def __len__(self):
        return len(self.labels)

    def matrices(self) -> np.ndarray:
        return from_coords(self.coords, self.basis.dim)

    def element(self, label) -> np.ndarray:
        return from_coords(self.coords[self.labels.index(label)], self.basis.dim)


def image_labels(m: int) -> tuple:
    pairs = [(j, k) for j in range(m) for k in range(j)]
    return (
        tuple(("n", j) for j in range(m))
        + tuple(("e", j, k) for j, k in pairs)
        + tuple(("f", j, k) for j, k in pairs)
    )


def image_generator(basis: FockBasis, label) -> sparse.csr_matrix:
    kind, *modes = label
    if kind == "n":
        (j,) = modes
        return 1j * ladder_pair_operator(basis, j, j)
    j, k = modes
    fwd = ladder_pair_operator(basis, j, k)
    back = ladder_pair_operator(basis, k, j)
    if kind == "e":
        return 0.5j * (fwd + back)
    if kind == "f":
        return 0.5 * (fwd - back)
    raise ValueError(f"unknown generator label {label!r}")


def image_entries(basis: FockBasis):
    """COO entries ``(generator, row, col, value)`` of all m^2 generators in one sweep.

    Generator indices follow :func:`image_labels`.  Basis states are grouped by
    the ket left after removing one photon; a†_i a_j connects exactly the
    members of one group.
    """
    m = basis.m
    npairs = m * (m - 1) // 2
    gen, rows, cols, vals = [], [], [], []
    groups = defaultdict(list)
    for col, ket in enumerate(basis.states):
        for j, nj in enumerate(ket):
            if nj == 0:
                continue
            gen.append(j)
            rows.append(col)
            cols.append(col)
            vals.append(1j * nj)
            groups[ket[:j] + (nj - 1,) + ket[j + 1 :]].append((j, nj, col))
    for members in groups.values():
        for i, ni, row in members:
            for j, nj, col in members:
                if i == j:
                    continue
                amp = math.sqrt(nj * ni)  # <row| a†_i a_j |col>
                hi, lo = (i, j) if i > j else (j, i)
                p = hi * (hi - 1) // 2 + lo
                gen += [m + p, m + npairs + p]
                rows += [row, row]
                cols += [col, col]
                vals += [0.5j * amp, (0.5 if i == hi else -0.5) * amp]
    return np.array(gen, dtype=np.int64), np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals)


def image_algebra_basis(basis: FockBasis) -> ImageBasis:
    labels = image_labels(basis.m)
    M = basis.dim
    npair = M * (M - 1) // 2
    gen, r, c, v = image_entries(basis)
    coords = np.zeros((len(labels), M * M))
    diag = r == c
    np.add.at(coords, (gen[diag], r[diag]), v[diag].imag)
    up = r < c
    # row-major position of (r, c) among strict upper-triangular pairs
    p = r[up] * M - r[up] * (r[up] + 1) // 2 + (c[up] - r[up] - 1)
    np.add.at(coords, (gen[up], M + p), _SQRT2 * v[up].imag)
    np.add.at(coords, (gen[up], M + npair + p), _SQRT2 * v[up].real)
    return ImageBasis(basis, labels, coords)


def _gram_schmidt(rows, against=None, *, drop_tol, strict, limit=None):
    """Classical Gram-Schmidt with one re-orthogonalization pass.

    Returns the accepted orthonormal rows.  With ``strict`` a residual below
    ``drop_tol`` raises :class:`RankDeficient`; otherwise the row is skipped.
    """
    dim = rows.shape[1]
    capacity = rows.shape[0] if limit is None else limit
    base = 0 if against is None else against.shape[0]
    Q = np.empty((base + capacity, dim))
    if base:
        Q[:base] = against
    count = base
    for idx, row in enumerate(rows):
        if count - base == capacity:
            break
        w = row.copy()
        for _ in range(2):
            Qk = Q[:count]
            w -= Qk.T @ (Qk @ w)
        norm = np.linalg.norm(w)
        if norm < drop_tol:
            if strict:
                raise RankDeficient(f"generator {idx} is linearly dependent (residual {norm:.3e})")
            continue
        Q[count] = w / norm
        count += 1
    return Q[base:count]


@dataclass(frozen=True, eq=False)
class OrthonormalFrame:
    """Orthonormal tangent basis of the image algebra plus, optionally, its complement."""

    m: int
    n: int
    M: int
    tangent: np.ndarray
    perpendicular: np.ndarray | None = None
    states: tuple | None = field(default=None, repr=False)

    @property
    def complete(self) -> bool:
        return self.perpendicular is not None

    def tangent_matrices(self) -> np.ndarray:
        return from_coords(self.tangent, self.M)

    def perpendicular_matrices(self) -> np.ndarray:
        if self.perpendicular is None:
            raise FrameMismatch("frame has no perpendicular completion")
        return from_coords(self.perpendicular, self.M)

    def all_coords(self) -> np.ndarray:
        if self.perpendicular is None:
            return self.tangent
        return np.vstack([self.tangent, self.perpendicular])


def orthonormalize(image: ImageBasis) -> OrthonormalFrame:
    tangent = _gram_schmidt(image.coords, drop_tol=GS_DROP_TOL, strict=True)
    b = image.basis
    return OrthonormalFrame(b.m, b.n, b.dim, tangent, None, b.states)


def complete_frame(frame: OrthonormalFrame) -> OrthonormalFrame:
    """Extend the tangent basis to an orthonormal basis of all of u(M)."""
    M = frame.M
    want = M * M - frame.tangent.shape[0]
    T = frame.tangent
    # canonical seeds with the tangent span projected out
    seeds = np.eye(M * M) - T.T @ T
    perp = _gram_schmidt(seeds, T, drop_tol=COMPLETION_TOL, strict=False, limit=want)
    if perp.shape[0] != want:
        raise CompletionCountMismatch(f"completion produced {perp.shape[0]} elements, expected {want}")
    return replace(frame, perpendicular=perp)


def decompose(v, frame: OrthonormalFrame):
    """Tangent and perpendicular coefficients of ``v`` (<c_i, v> for each frame element)."""
    v = np.asarray(v)
    if v.shape != (frame.M, frame.M):
        raise DimensionMismatch(f"element of shape {v.shape} for frame with M={frame.M}")
    c = to_coords(v)
    t = frame.tangent @ c
    p = frame.perpendicular @ c if frame.perpendicular is not None else None
    return t, p


def reconstruct(tangent_coeffs, perpendicular_coeffs, frame: OrthonormalFrame) -> np.ndarray:
    c = np.asarray(tangent_coeffs) @ frame.tangent
    if perpendicular_coeffs is not None:
        c = c + np.asarray(perpendicular_coeffs) @ frame.perpendicular
    return from_coords(c, frame.M)


def build_frame(basis: FockBasis, *, complete=True) -> OrthonormalFrame:
    frame = orthonormalize(image_algebra_basis(basis))
    return complete_frame(frame) if complete else frame


_cache: dict = {}
_cache_lock = threading.Lock()


def get_frame(m: int, n: int, cap: int = DEFAULT_CAP, *, complete=True) -> OrthonormalFrame:
    """Cached frame for (m, n); concurrent first builds are serialized."""
    key = (m, n, cap)
    with _cache_lock:
        frame = _cache.get(key)
        if frame is None:
            frame = build_frame(enumerate_basis(m, n, cap), complete=complete)
        elif complete and not frame.complete:
            frame = complete_frame(frame)
        _cache[key] = frame
        return frame


def clear_frame_cache():
    with _cache_lock:
        _cache.clear()


MAGIC = b"FGFRAME1"
_HEADER = struct.Struct("<8s5q")


def dump_frame(frame: OrthonormalFrame, path) -> None:
    """Write the frame as row-major complex128 matrices after a fixed header."""
    nt = frame.tangent.shape[0]
    npp = 0 if frame.perpendicular is None else frame.perpendicular.shape[0]
    mats = from_coords(frame.all_coords(), frame.M).astype("<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, frame.m, frame.n, frame.M, nt, npp))
        fh.write(np.ascontiguousarray(mats).tobytes())


def load_frame(path, m: int | None = None, n: int | None = None) -> OrthonormalFrame:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FrameCacheError(f"{path}: truncated header")
    magic, fm, fn, M, nt, npp = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FrameCacheError(f"{path}: bad magic {magic!r}")
    if (m is not None and fm != m) or (n is not None and fn != n):
        raise FrameCacheError(f"{path}: frame is for ({fm},{fn}), wanted ({m},{n})")
    if M < 1 or nt < 0 or npp not in (0, M * M - nt):
        raise FrameCacheError(f"{path}: inconsistent header counts")
    try:
        basis = enumerate_basis(fm, fn, cap=max(M, 1))
    except Exception as exc:
        raise FrameCacheError(f"{path}: header does not describe a valid space ({exc})") from exc
    if basis.dim != M or nt != fm * fm:
        raise FrameCacheError(f"{path}: header M={M}, tangent={nt} do not match ({fm},{fn})")
    body = raw[_HEADER.size :]
    if len(body) != (nt + npp) * M * M * 16:
        raise FrameCacheError(f"{path}: body size {len(body)} does not match header")
    mats = np.frombuffer(body, dtype="<c16").reshape(nt + npp, M, M)
    coords = to_coords(mats)
    if not np.allclose(from_coords(coords, M), mats, atol=1e-12):
        raise FrameCacheError(f"{path}: stored matrices are not skew-Hermitian")
    full = coords @ coords.T
    if not np.allclose(full, np.eye(nt + npp), atol=1e-9):
        raise FrameCacheError(f"{path}: stored frame is not orthonormal")
    perp = coords[nt:].copy() if nt + npp == M * M else None
    return OrthonormalFrame(fm, fn, M, coords[:nt].copy(), perp, basis.states)
