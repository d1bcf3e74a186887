"""Photonic homomorphism phi: U(m) -> U(M), its differential, and the image membership test."""

from __future__ import annotations

import math
from itertools import product

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .algebra import OrthonormalFrame, to_coords
from .errors import DimensionMismatch, LogBranchFailure, NotUnitary, PhotonNumberMismatch
from .fock_space import DEFAULT_CAP, FockBasis, enumerate_basis, ladder_pair_operator

BRANCH_TOL = 1e-8
BRANCH_PHASE = np.pi / 7
MEMBERSHIP_TOL = 1e-8


def check_unitary(S, tol=1e-10) -> np.ndarray:
    S = np.asarray(S, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotUnitary(f"expected a square matrix, got shape {S.shape}")
    err = np.max(np.abs(S.conj().T @ S - np.eye(S.shape[0])), initial=0.0)
    if err > tol:
        raise NotUnitary(f"S^H S deviates from the identity by {err:.3e}")
    return S


def differential_lift(h, basis: FockBasis) -> np.ndarray:
    """sum_jk h_jk a†_j a_k as a dense M x M matrix."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (basis.m, basis.m):
        raise DimensionMismatch(f"h has shape {h.shape}, basis has m={basis.m}")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, k in zip(*np.nonzero(h)):
        out += h[j, k] * ladder_pair_operator(basis, int(j), int(k)).toarray()
    return out


def unitary_log(S) -> np.ndarray:
    """Principal logarithm of a unitary matrix via its (diagonal) complex Schur form."""
    S = np.asarray(S, dtype=complex)
    T, Z = scipy.linalg.schur(S, output="complex")
    phases = np.angle(np.diag(T))
    return (Z * (1j * phases)) @ Z.conj().T


def skew_expm(X) -> np.ndarray:
    """exp(X) for skew-Hermitian X from the eigendecomposition of the Hermitian -iX."""
    H = -1j * np.asarray(X)
    H = (H + H.conj().T) / 2
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ V.conj().T


def photonic_lift(S, n: int, *, basis: FockBasis | None = None, cap: int = DEFAULT_CAP) -> np.ndarray:
    """U = phi(S) on the n-photon space, computed as exp(dphi(log S))."""
    S = check_unitary(S)
    m = S.shape[0]
    if basis is None:
        basis = enumerate_basis(m, n, cap)
    elif (basis.m, basis.n) != (m, n):
        raise DimensionMismatch(f"basis is ({basis.m},{basis.n}), lift requested ({m},{n})")
    eig = np.linalg.eigvals(S)
    theta = 0.0
    if np.any(np.abs(eig + 1) < BRANCH_TOL):
        # phi(e^{i t} S) = e^{i n t} phi(S) on the n-photon sector
        theta = BRANCH_PHASE
        S = np.exp(1j * theta) * S
        if np.any(np.abs(np.linalg.eigvals(S) + 1) < BRANCH_TOL):
            raise LogBranchFailure("phase-shifted S still has an eigenvalue at -1")
    U = skew_expm(differential_lift(unitary_log(S), basis))
    if theta:
        U = np.exp(-1j * n * theta) * U
    return U


def permanent(A) -> complex:
    """Ryser's formula with Gray-code updates, O(2^k k) for a k x k matrix."""
    A = np.asarray(A, dtype=complex)
    k = A.shape[0]
    if A.shape != (k, k):
        raise DimensionMismatch("permanent needs a square matrix")
    if k == 0:
        return 1.0 + 0j
    row_sums = np.zeros(k, dtype=complex)
    total = 0j
    subset = 0
    for step in range(1, 2**k):
        # the column that flips between consecutive Gray codes
        col = (step & -step).bit_length() - 1
        bit = 1 << col
        if subset & bit:
            row_sums -= A[:, col]
        else:
            row_sums += A[:, col]
        subset ^= bit
        sign = -1 if bin(subset).count("1") % 2 else 1
        total += sign * np.prod(row_sums)
    return (-1) ** k * total


def matrix_element_oracle(S, ket_in, ket_out) -> complex:
    """<out| phi(S) |in> as a permanent with repeated rows and columns."""
    S = np.asarray(S, dtype=complex)
    ket_in, ket_out = tuple(ket_in), tuple(ket_out)
    if len(ket_in) != len(ket_out) or sum(ket_in) != sum(ket_out):
        raise PhotonNumberMismatch(f"{ket_in} and {ket_out} are not in the same (m,n) space")
    if len(ket_in) != S.shape[0]:
        raise DimensionMismatch(f"kets have {len(ket_in)} modes, S is {S.shape[0]}x{S.shape[1]}")
    rows = [j for j, c in enumerate(ket_out) for _ in range(c)]
    cols = [k for k, c in enumerate(ket_in) for _ in range(c)]
    norm = math.prod(math.factorial(c) for c in ket_in + ket_out)
    return permanent(S[np.ix_(rows, cols)]) / math.sqrt(norm)


def lift_by_permanents(S, basis: FockBasis) -> np.ndarray:
    S = np.asarray(S, dtype=complex)
    U = np.empty((basis.dim, basis.dim), dtype=complex)
    for (r, out), (c, inp) in product(enumerate(basis.states), repeat=2):
        U[r, c] = matrix_element_oracle(S, inp, out)
    return U


def adjoint_residual(U, frame: OrthonormalFrame) -> float:
    """Largest perpendicular energy of U c U^H over the tangent frame elements."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (frame.M, frame.M):
        raise DimensionMismatch(f"U has shape {U.shape}, frame has M={frame.M}")
    C = frame.tangent_matrices()
    W = U @ C @ U.conj().T
    w = to_coords((W - np.swapaxes(W.conj(), -1, -2)) / 2)
    inside = w @ frame.tangent.T
    energy = np.sum(w * w, axis=1) - np.sum(inside * inside, axis=1)
    return float(max(energy.max(initial=0.0), 0.0))


def is_optical_realization(U, frame: OrthonormalFrame, tol: float = MEMBERSHIP_TOL):
    """Whether conjugation by U maps the image algebra into itself; returns (flag, residual)."""
    U = np.asarray(U, dtype=complex)
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0)
    if err > 1e-9:
        raise NotUnitary(f"U^H U deviates from the identity by {err:.3e}")
    residual = adjoint_residual(U, frame)
    return residual < tol, residual


def haar_unitary(dim: int, rng) -> np.ndarray:
    if dim == 1:  # scipy's sampler needs dim >= 2; U(1) is a uniform phase
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"rows": A.shape[0], "cols": A.shape[1], "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(data) -> np.ndarray:
    try:
        rows, cols = int(data["rows"]), int(data["cols"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float) if "im" in data else np.zeros_like(re)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise DimensionMismatch(f"matrix JSON declares {rows}x{cols} but holds {re.shape} / {im.shape}")
    return re + 1j * im
