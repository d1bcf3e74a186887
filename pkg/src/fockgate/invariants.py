"""Tangent and perpendicular invariants and the transition verdict built on them.

Two independent routes compute the tangent invariant ``I_t``:

* projection of ``i rho`` onto an orthonormal frame of the image algebra
  (works for mixed states, needs M^2-sized objects);
* the closed formula ``C1 + C2 * reduced_sum`` for pure states, which only
  needs first-order ladder expectations and so runs far beyond the dimension cap.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .algebra import OrthonormalFrame, get_frame, to_coords
from .errors import DomainError, ExactUnavailable, FrameMismatch, ShapeMismatch
from .exact import Surd
from .fock_space import (
    DEFAULT_CAP,
    DensityMatrix,
    PureState,
    enumerate_basis,
    purity,
)

DEFAULT_TOLERANCE = 1e-7

Exactish = Union[Fraction, float]


def _gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den) evaluated in log space.

    Every argument used here is positive, so the gamma values are positive and
    only the magnitude needs tracking; a non-positive integer in ``den`` is a
    pole and contributes a zero factor.
    """
    if any(x <= 0 and float(x).is_integer() for x in den):
        return 0.0
    log = sum(math.lgamma(x) for x in num) - sum(math.lgamma(x) for x in den)
    return math.exp(log)


@dataclass(frozen=True)
class InvariantConstants:
    m: int
    n: int
    A: float
    C: float
    C1: float
    C2: float
    C1_exact: Fraction = field(repr=False)
    C2_exact: Fraction = field(repr=False)
    _B: float = field(repr=False)

    @property
    def B(self) -> float:
        if self.n < 2 or self.m < 2:
            raise DomainError(f"B is only defined for m >= 2 and n >= 2 (got m={self.m}, n={self.n})")
        return self._B

    @property
    def alpha(self) -> float:
        return self.A / self.B


def constants(m: int, n: int) -> InvariantConstants:
    if m < 1 or n < 1:
        raise DomainError(f"constants need m >= 1 and n >= 1, got m={m}, n={n}")
    A = (m + 2 * n - 1) * _gamma_ratio([m + n], [m + 2, n])
    B = _gamma_ratio([m + n], [m + 2, n - 1])
    C = _gamma_ratio([m + n], [m + 1, n])
    C1 = (m * n + 1) * _gamma_ratio([m + 1, n + 1], [m + n + 1])
    C2 = 2 * _gamma_ratio([m + 2, n], [m + n + 1])
    f = math.factorial
    C1_exact = Fraction((m * n + 1) * f(m) * f(n), f(m + n))
    C2_exact = Fraction(2 * f(m + 1) * f(n - 1), f(m + n))
    if n >= 2 and m >= 2:
        for other in (2 / (A - B), 2 / (B + C)):
            if abs(other - C2) > 1e-10 * max(1.0, C2):
                raise ArithmeticError(f"cross identity for C2 failed at (m,n)=({m},{n})")
    return InvariantConstants(m, n, A, C, C1, C2, C1_exact, C2_exact, B)


def occupation_moment_sums(m: int, n: int, cap: int = 10**7) -> tuple[int, int | None, int]:
    """Sums of n_1^2, n_1 n_2 and n_1 over every basis ket (B is None when m < 2)."""
    A = B = C = 0
    for ket in enumerate_basis(m, n, cap):
        A += ket[0] * ket[0]
        C += ket[0]
        if m >= 2:
            B += ket[0] * ket[1]
    return A, (B if m >= 2 else None), C


def gram_number_sector(m: int, n: int):
    """Gram matrix of the number generators i n_j and its closed-form inverse."""
    if n < 2 or m < 2:
        raise DomainError(f"the number-sector Gram matrix needs m >= 2 and n >= 2, got ({m},{n})")
    k = constants(m, n)
    A, B, alpha = k.A, k.B, k.alpha
    g = np.full((m, m), B)
    np.fill_diagonal(g, A)
    scale = B * (alpha - 1) * (m - 1 + alpha)
    g_inv = np.full((m, m), -1.0 / scale)
    np.fill_diagonal(g_inv, (m - 2 + alpha) / scale)
    return g, g_inv


def _hopping_table(terms, m, root):
    """Off-diagonal <a†_i a_j> (keyed (i, j)) and mean photon numbers, from one sweep of the support.

    Kets are grouped by what is left after removing one photon; a†_i a_j only
    connects two kets of the same group, so no target ket is ever built.
    """
    groups = defaultdict(list)
    numbers = [None] * m
    for ket, amp in terms.items():
        weight = amp.conjugate() * amp
        for j, nj in enumerate(ket):
            if nj == 0:
                continue
            term = weight * nj
            numbers[j] = term if numbers[j] is None else numbers[j] + term
            groups[ket[:j] + (nj - 1,) + ket[j + 1 :]].append((j, nj, amp))
    hop = {}
    for members in groups.values():
        for i, ni, target_amp in members:
            for j, nj, source_amp in members:
                if i == j:
                    continue
                # a_j takes sqrt(nj) from the source, a†_i gives sqrt(ni) to the target
                term = target_amp.conjugate() * source_amp * root(nj * ni)
                hop[i, j] = term if (i, j) not in hop else hop[i, j] + term
    return hop, numbers


def _reduced(terms, m, root, zero):
    hop, numbers = _hopping_table(terms, m, root)
    numbers = [zero if x is None else x for x in numbers]
    total = zero
    for i in range(m):
        for j in range(i + 1, m):
            h_ij = hop.get((i, j))
            h_ji = hop.get((j, i))
            if h_ij is not None and h_ji is not None:
                total = total + h_ij * h_ji
            total = total - numbers[i] * numbers[j]
    return total


def reduced_sum_exact(psi: PureState) -> Surd:
    """sum_{i<j} (<a†_i a_j><a†_j a_i> - <n_i><n_j>) in exact arithmetic."""
    if psi.exact is None:
        raise ExactUnavailable("state has no exact amplitudes")
    return _reduced(psi.exact, psi.m, Surd.sqrt, Surd(0))


def reduced_sum(psi: PureState) -> Exactish:
    """The reduced-criterion sum; a Fraction when it can be certified exactly."""
    if psi.exact is not None:
        value = reduced_sum_exact(psi)
        if value.is_rational():
            return value.to_fraction()
        return float(complex(value).real)
    value = _reduced(psi.terms, psi.m, math.sqrt, 0j)
    return float(complex(value).real)


def tangent_invariant_exact(psi: PureState) -> Surd:
    k = constants(psi.m, psi.n)
    return k.C1_exact + k.C2_exact * reduced_sum_exact(psi)


def tangent_invariant_closed(psi: PureState) -> float:
    """I_t of |psi><psi| from first-order expectations only; no M x M objects."""
    k = constants(psi.m, psi.n)
    rs = reduced_sum(psi)
    if isinstance(rs, Fraction):
        return float(k.C1_exact + k.C2_exact * rs)
    return k.C1 + k.C2 * rs


@dataclass(frozen=True)
class InvariantReport:
    I_t: float
    I_p: float
    purity: float
    reduced_sum: Exactish | None
    method: str

    def to_json(self) -> dict:
        rs = self.reduced_sum
        if isinstance(rs, Fraction):
            rs = {"num": rs.numerator, "den": rs.denominator}
        return {"I_t": self.I_t, "I_p": self.I_p, "purity": self.purity, "reduced_sum": rs, "method": self.method}


def invariants_projection(rho: DensityMatrix, frame: OrthonormalFrame) -> InvariantReport:
    if (rho.m, rho.n, rho.basis.dim) != (frame.m, frame.n, frame.M):
        raise FrameMismatch(f"state lives in ({rho.m},{rho.n}) but the frame is for ({frame.m},{frame.n})")
    if frame.states is not None and frame.states != rho.basis.states:
        raise FrameMismatch("frame and density matrix use different basis orderings")
    c = to_coords(1j * rho.matrix)
    total = float(c @ c)
    t = frame.tangent @ c
    I_t = float(t @ t)
    if frame.perpendicular is not None:
        p = frame.perpendicular @ c
        I_p = float(p @ p)
    else:
        I_p = total - I_t
    pure = rho.pure_component()
    rs = reduced_sum(pure) if pure is not None else None
    return InvariantReport(I_t, I_p, purity(rho), rs, "projection")


def invariants_closed(psi: PureState) -> InvariantReport:
    I_t = tangent_invariant_closed(psi)
    return InvariantReport(I_t, 1.0 - I_t, 1.0, reduced_sum(psi), "closed_form")


@dataclass(frozen=True)
class Witness:
    quantity: str
    lhs: float
    rhs: float
    gap: float
    exact_gap: Fraction | None = None

    def to_json(self) -> dict:
        out = {"quantity": self.quantity, "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}
        if self.exact_gap is not None:
            out["exact_gap"] = {"num": self.exact_gap.numerator, "den": self.exact_gap.denominator}
        return out


@dataclass(frozen=True)
class Verdict:
    forbidden: bool
    violations: tuple[Witness, ...] = ()
    method: str = "closed_form"
    exact: bool = False

    @property
    def verdict(self) -> str:
        return "forbidden" if self.forbidden else "inconclusive"

    @property
    def witness(self) -> Witness | None:
        return self.violations[0] if self.violations else None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.to_json(),
            "violations": [w.to_json() for w in self.violations],
            "method": self.method,
            "exact": self.exact,
        }


def _differs(a: float, b: float, tol: float) -> bool:
    return abs(a - b) > tol * max(1.0, abs(a), abs(b))


def _as_pure(state):
    if isinstance(state, PureState):
        return state
    return state.pure_component()


def _float_witness(name, a, b):
    return Witness(name, float(a), float(b), abs(float(a) - float(b)))


def _exact_witness(name, a: Surd, b: Surd):
    gap = a - b
    exact_gap = abs(gap.to_fraction()) if gap.is_rational() else None
    fa, fb = float(complex(a).real), float(complex(b).real)
    return Witness(name, fa, fb, abs(fa - fb), exact_gap)


def transition_verdict(state_in, state_out, tol: float = DEFAULT_TOLERANCE, *, frame=None, cap=DEFAULT_CAP) -> Verdict:
    """Forbidden when a conserved quantity differs; otherwise Inconclusive.

    The invariants are necessary conditions only, so there is no "allowed"
    outcome.  Pure inputs use the closed formula (exactly, when both states
    carry exact amplitudes); anything mixed goes through the projection path.
    """
    if (state_in.m, state_in.n) != (state_out.m, state_out.n):
        raise ShapeMismatch(
            f"input is ({state_in.m},{state_in.n}) but output is ({state_out.m},{state_out.n})"
        )
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    pin, pout = _as_pure(state_in), _as_pure(state_out)
    if pin is not None and pout is not None:
        return _pure_verdict(pin, pout, tol)
    return _mixed_verdict(state_in, state_out, tol, frame, cap)


def _pure_verdict(pin: PureState, pout: PureState, tol: float) -> Verdict:
    if pin.exact is not None and pout.exact is not None:
        rs_in, rs_out = reduced_sum_exact(pin), reduced_sum_exact(pout)
        it_in, it_out = tangent_invariant_exact(pin), tangent_invariant_exact(pout)
        violations = []
        if it_in != it_out:
            violations.append(_exact_witness("I_t", it_in, it_out))
        if rs_in != rs_out:
            violations.append(_exact_witness("reduced_sum", rs_in, rs_out))
        return Verdict(bool(violations), tuple(violations), "closed_form", exact=True)
    it_in, it_out = tangent_invariant_closed(pin), tangent_invariant_closed(pout)
    rs_in, rs_out = float(reduced_sum(pin)), float(reduced_sum(pout))
    violations = []
    if _differs(it_in, it_out, tol):
        violations.append(_float_witness("I_t", it_in, it_out))
    if _differs(rs_in, rs_out, tol):
        violations.append(_float_witness("reduced_sum", rs_in, rs_out))
    return Verdict(bool(violations), tuple(violations), "closed_form")


def _to_density(state, cap) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    return DensityMatrix.from_pure(state, enumerate_basis(state.m, state.n, cap))


def _mixed_verdict(state_in, state_out, tol, frame, cap) -> Verdict:
    rho_in, rho_out = _to_density(state_in, cap), _to_density(state_out, cap)
    violations = []
    pur_in, pur_out = purity(rho_in), purity(rho_out)
    # cheapest check first: linear optics cannot change tr(rho^2)
    if _differs(pur_in, pur_out, tol):
        violations.append(_float_witness("purity", pur_in, pur_out))
    if frame is None:
        frame = get_frame(rho_in.m, rho_in.n, cap)
    r_in = invariants_projection(rho_in, frame)
    r_out = invariants_projection(rho_out, frame)
    if _differs(r_in.I_t, r_out.I_t, tol):
        violations.append(_float_witness("I_t", r_in.I_t, r_out.I_t))
    if _differs(r_in.I_p, r_out.I_p, tol):
        violations.append(_float_witness("I_p", r_in.I_p, r_out.I_p))
    return Verdict(bool(violations), tuple(violations), "projection")
