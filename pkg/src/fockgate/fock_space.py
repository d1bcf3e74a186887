"""The n-photon, m-mode Fock space.

Basis states are weak compositions of ``n`` into ``m`` parts, ordered
lexicographically decreasing: for ``m = n = 2`` the order is ``|2,0>, |1,1>,
|0,2>``.  Modes are indexed from 0 throughout the Python API.

Pure states are stored sparsely (ket -> amplitude) so that expectation values
scale with the support of the state rather than with ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    ExactUnavailable,
    InvalidState,
    ModeOutOfRange,
    OverflowBeyondCap,
)
from .exact import Surd

DEFAULT_CAP = 4096
INT64_MAX = 2**63 - 1

Ket = tuple[int, ...]


def dimension(m: int, n: int) -> int:
    """Number of weak compositions of ``n`` into ``m`` parts, C(m+n-1, n)."""
    if m < 1 or n < 0:
        raise ValueError(f"need m >= 1 and n >= 0, got m={m}, n={n}")
    # C(m+n-1, n) = C(m+n-1, m-1); the smaller index keeps huge n cheap
    dim = math.comb(m + n - 1, min(n, m - 1))
    if dim > INT64_MAX:
        raise OverflowBeyondCap(f"C({m + n - 1},{n}) does not fit in a signed 64-bit integer")
    return dim


def _compositions(n: int, m: int) -> Iterator[Ket]:
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, m - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    m: int
    n: int
    states: tuple[Ket, ...]
    index: Mapping[Ket, int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def position(self, ket: Sequence[int]) -> int:
        try:
            return self.index[tuple(ket)]
        except KeyError:
            raise InvalidState(f"{tuple(ket)} is not a state of the ({self.m},{self.n}) basis") from None

    def permuted(self, order: Sequence[int]) -> FockBasis:
        """Same space with the states reordered (``order[k]`` is the old position of new state k)."""
        states = tuple(self.states[k] for k in order)
        if sorted(order) != list(range(self.dim)):
            raise ValueError("order must be a permutation of the basis positions")
        return FockBasis(self.m, self.n, states, {s: k for k, s in enumerate(states)})


def enumerate_basis(m: int, n: int, cap: int = DEFAULT_CAP) -> FockBasis:
    dim = dimension(m, n)
    if dim > cap:
        raise DimensionCapExceeded(dim, cap)
    states = tuple(_compositions(n, m))
    return FockBasis(m, n, states, {s: k for k, s in enumerate(states)})


def ladder_pair_operator(basis: FockBasis, i: int, j: int) -> sparse.csr_matrix:
    """Sparse matrix of a†_i a_j on ``basis`` (the number operator when ``i == j``)."""
    _check_modes(basis.m, i, j)
    rows, cols, vals = [], [], []
    for col, ket in enumerate(basis.states):
        if i == j:
            if ket[i]:
                rows.append(col)
                cols.append(col)
                vals.append(float(ket[i]))
            continue
        if ket[j] == 0:
            continue
        target = list(ket)
        target[j] -= 1
        target[i] += 1
        rows.append(basis.index[tuple(target)])
        cols.append(col)
        vals.append(math.sqrt(ket[j] * target[i]))
    M = basis.dim
    return sparse.csr_matrix((vals, (rows, cols)), shape=(M, M), dtype=complex)


def _check_modes(m, *modes):
    for k in modes:
        if not 0 <= k < m:
            raise ModeOutOfRange(f"mode index {k} outside 0..{m - 1}")


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized superposition of n-photon Fock kets.

    ``terms`` holds only nonzero amplitudes.  ``exact`` optionally mirrors them
    as :class:`~fockgate.exact.Surd` values; when present it is authoritative
    for exact reduced-criterion evaluation.
    """

    m: int
    n: int
    terms: Mapping[Ket, complex]
    exact: Mapping[Ket, Surd] | None = None

    def __post_init__(self):
        if not self.terms:
            raise InvalidState("a pure state needs at least one nonzero amplitude")
        for ket in self.terms:
            if len(ket) != self.m or sum(ket) != self.n or min(ket) < 0:
                raise InvalidState(f"ket {ket} is not an ({self.m},{self.n}) Fock ket")
        norm2 = sum(abs(a) ** 2 for a in self.terms.values())
        if abs(norm2 - 1.0) > 1e-12:
            raise InvalidState(f"state norm^2 is {norm2!r}, expected 1")
        if self.exact is not None and set(self.exact) != set(self.terms):
            raise InvalidState("exact amplitudes must have the same support as the float ones")

    @classmethod
    def from_terms(cls, terms: Mapping[Sequence[int], complex] | Iterable, *, normalize=True) -> PureState:
        """Build from ``{ket: amplitude}``; repeated kets are summed, zeros dropped."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Ket, complex] = {}
        for ket, amp in items:
            ket = tuple(int(x) for x in ket)
            acc[ket] = acc.get(ket, 0j) + complex(amp)
        acc = {k: a for k, a in acc.items() if a != 0}
        if not acc:
            raise InvalidState("state has zero norm")
        m, n = _shape_of(acc)
        if normalize:
            norm = math.sqrt(sum(abs(a) ** 2 for a in acc.values()))
            acc = {k: a / norm for k, a in acc.items()}
        return cls(m, n, acc)

    @classmethod
    def from_exact(cls, terms: Mapping[Sequence[int], Surd]) -> PureState:
        """Build from exact amplitudes; they must already be normalized."""
        exact = {tuple(k): Surd(v) for k, v in terms.items() if v}
        if not exact:
            raise InvalidState("state has zero norm")
        norm2 = sum((a.abs2() for a in exact.values()), Surd(0))
        if norm2 != 1:
            raise InvalidState(f"exact amplitudes have norm^2 {norm2!r}")
        m, n = _shape_of(exact)
        return cls(m, n, {k: complex(a) for k, a in exact.items()}, exact)

    @classmethod
    def from_vector(cls, basis: FockBasis, vector, *, tol=0.0) -> PureState:
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (basis.dim,):
            raise DimensionMismatch(f"vector of shape {vector.shape} for basis of size {basis.dim}")
        terms = {basis.states[k]: complex(a) for k, a in enumerate(vector) if abs(a) > tol}
        return cls(basis.m, basis.n, terms)

    def vector(self, basis: FockBasis) -> np.ndarray:
        if (basis.m, basis.n) != (self.m, self.n):
            raise DimensionMismatch(f"state is ({self.m},{self.n}), basis is ({basis.m},{basis.n})")
        out = np.zeros(basis.dim, dtype=complex)
        for ket, amp in self.terms.items():
            out[basis.position(ket)] = amp
        return out

    def is_exact(self) -> bool:
        return self.exact is not None


def _shape_of(terms) -> tuple[int, int]:
    kets = list(terms)
    m, n = len(kets[0]), sum(kets[0])
    for ket in kets[1:]:
        if len(ket) != m or sum(ket) != n:
            raise InvalidState(f"kets {kets[0]} and {ket} differ in mode count or photon number")
    return m, n


def fock_state(ket: Sequence[int]) -> PureState:
    ket = tuple(int(x) for x in ket)
    return PureState.from_exact({ket: Surd(1)})


def _hop(terms, i, j, root):
    """<psi| a†_i a_j |psi> from sparse amplitudes; generic over complex and Surd."""
    total = None
    for ket, amp in terms.items():
        if i == j:
            if ket[i]:
                term = amp.conjugate() * amp * ket[i]
                total = term if total is None else total + term
            continue
        nj = ket[j]
        if nj == 0:
            continue
        target = list(ket)
        target[j] -= 1
        target[i] += 1
        other = terms.get(tuple(target))
        if other is None:
            continue
        term = other.conjugate() * amp * root(nj * target[i])
        total = term if total is None else total + term
    return total


def hopping_expectation(state: PureState, i: int, j: int) -> complex:
    """<a†_i a_j> for 0-based modes; for ``i == j`` this is the mean photon number of mode ``i``."""
    _check_modes(state.m, i, j)
    value = _hop(state.terms, i, j, math.sqrt)
    return 0j if value is None else complex(value)


def hopping_expectation_exact(state: PureState, i: int, j: int) -> Surd:
    _check_modes(state.m, i, j)
    if state.exact is None:
        raise ExactUnavailable("state has no exact amplitudes")
    value = _hop(state.exact, i, j, Surd.sqrt)
    return Surd(0) if value is None else value


def mean_photon_numbers(state: PureState) -> np.ndarray:
    out = np.zeros(state.m)
    for ket, amp in state.terms.items():
        out += abs(amp) ** 2 * np.asarray(ket, dtype=float)
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    basis: FockBasis
    matrix: np.ndarray
    components: tuple = ()

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", rho)
        M = self.basis.dim
        if rho.shape != (M, M):
            raise DimensionMismatch(f"density matrix of shape {rho.shape} for basis of size {M}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise InvalidState(f"density matrix trace is {np.trace(rho)!r}")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise InvalidState("density matrix has a negative eigenvalue")

    @property
    def m(self) -> int:
        return self.basis.m

    @property
    def n(self) -> int:
        return self.basis.n

    @classmethod
    def from_pure(cls, state: PureState, basis: FockBasis) -> DensityMatrix:
        v = state.vector(basis)
        return cls(basis, np.outer(v, v.conj()), ((1.0, state),))

    @classmethod
    def from_mixture(cls, mixture: Sequence[tuple[float, PureState]], basis: FockBasis) -> DensityMatrix:
        rho = np.zeros((basis.dim, basis.dim), dtype=complex)
        for p, state in mixture:
            v = state.vector(basis)
            rho += p * np.outer(v, v.conj())
        # exact Hermiticity; sums of outer products drift by an ulp
        rho = (rho + rho.conj().T) / 2
        return cls(basis, rho, tuple(mixture))

    def pure_component(self) -> PureState | None:
        """The generating pure state when this matrix came from a single one."""
        if len(self.components) == 1 and abs(self.components[0][0] - 1.0) < 1e-12:
            return self.components[0][1]
        return None


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), computed as the squared Frobenius norm of the Hermitian matrix."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def state_to_json(state: PureState) -> dict:
    return {
        "m": state.m,
        "n": state.n,
        "terms": [
            {"ket": list(ket), "re": amp.real, "im": amp.imag}
            for ket, amp in sorted(state.terms.items(), reverse=True)
        ],
    }


def state_from_json(data: Mapping) -> PureState:
    try:
        m, n = int(data["m"]), int(data["n"])
        terms = [(tuple(t["ket"]), complex(t["re"], t.get("im", 0.0))) for t in data["terms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidState(f"malformed pure-state JSON: {exc}") from exc
    state = PureState.from_terms(terms)
    if (state.m, state.n) != (m, n):
        raise InvalidState(f"JSON declares ({m},{n}) but kets are ({state.m},{state.n})")
    return state


def density_to_json(rho: DensityMatrix) -> dict:
    if not rho.components:
        raise InvalidState("density matrix has no recorded mixture components")
    return {
        "m": rho.m,
        "n": rho.n,
        "mixture": [{"p": p, "state": state_to_json(s)} for p, s in rho.components],
    }
