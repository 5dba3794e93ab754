"""Order-6 normal-form step: the sextic action part K, the resonant
cancellation, the sextic generator, and the sextuple small-divisor bound.

The sextic remainder splits as R6 = K + (resonant non-normal part) + Qtilde.
The resonant part must cancel identically; this module verifies that both
ways: every resonant monomial's coefficient in R6 is exactly zero, and the
independent nine-term kernel sum from the identities module vanishes for the
same index data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coeffs import ExactCoeff
from .identities import TriplePair, nine_term_sums
from .order4 import compute_R6, in_delta
from .poly import Monomial, PolyHamiltonian, split_normal
from .states import mode_range


def tau(j: int, k: int, l: int) -> Fraction:
    """(j-k+l)/((j-k)(l-k)), exact; requires j != k and l != k.

    Equal to -2(j-k+l)/(j^2-k^2+l^2-(j-k+l)^2) wherever both forms are
    defined, which the tests confirm.
    """
    if j == k or l == k:
        raise ZeroDivisionError("tau undefined at j=k or l=k")
    return Fraction(j - k + l, (j - k) * (l - k))


def build_K(M: int) -> PolyHamiltonian:
    """Closed-form sextic action part:

        -(1/8pi^2) sum_{j != k} (2j-k)/(j-k)^2 |q_j|^4 |q_k|^2
    """
    if M < 2:
        raise ValueError("need M >= 2")
    items = []
    for j in mode_range(M):
        for k in mode_range(M):
            if k == j or 2 * j - k == 0:
                continue
            mono = Monomial.of((j, j, k), (j, j, k))
            coeff = ExactCoeff.real(
                Fraction(-(2 * j - k), 8 * (j - k) ** 2), pi_power=2
            )
            items.append((mono, coeff))
    return PolyHamiltonian.from_terms(M, items)


# -- resonant set ----------------------------------------------------------------


def _nonzero_triples_by_invariants(M: int):
    values = [v for v in range(-M, M + 1) if v != 0]
    buckets: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    for triple in itertools.combinations_with_replacement(values, 3):
        key = (sum(triple), sum(v * v for v in triple))
        buckets.setdefault(key, []).append(triple)
    return buckets


def iter_resonant_monomials(M: int):
    """Every degree-6 monomial on the resonant non-normal index set with
    |modes| <= M: zero momentum, zero square sum, disjoint plus/minus values.

    Not deduplicated: conjugate and negated monomials are distinct monomials
    and are all yielded.
    """
    for group in _nonzero_triples_by_invariants(M).values():
        if len(group) < 2:
            continue
        for x, y in itertools.permutations(group, 2):
            if set(x) & set(y):
                continue
            yield Monomial.of(x, y)


def enumerate_resonant(M: int) -> list[tuple[int, int, int, int, int, int]]:
    """Canonical resonant sextuples (j1..j6, alternating slots), deduplicated
    up to permutations within slot parities, conjugation and global negation.

    The index set admits repeated entries within a parity class and mixed
    signs, so members exist from max index 2 on (plus {1,1,-2} against minus
    {-1,-1,2}); the smallest all-positive member is {1,4,4} against {2,2,5}
    at index 5, and the all-distinct positive ones start at 7.
    """
    seen = set()
    out = []
    for group in _nonzero_triples_by_invariants(M).values():
        if len(group) < 2:
            continue
        for x, y in itertools.combinations(group, 2):
            if set(x) & set(y):
                continue
            negx = tuple(sorted(-v for v in x))
            negy = tuple(sorted(-v for v in y))
            canon = min((x, y), (y, x), (negx, negy), (negy, negx))
            if canon in seen:
                continue
            seen.add(canon)
            px, py = canon
            out.append((px[0], py[0], px[1], py[1], px[2], py[2]))
    out.sort()
    return out


@dataclass
class KtildeReport:
    truncation: int
    checked: int
    coefficient_violations: list = field(default_factory=list)
    structural_violations: list = field(default_factory=list)
    tau_sum_failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (
            self.coefficient_violations
            or self.structural_violations
            or self.tau_sum_failures
        )


def verify_Ktilde_zero(M: int, r6: PolyHamiltonian | None = None) -> KtildeReport:
    """The resonant non-normal part of R6 vanishes identically.

    Three independent checks: (a) each resonant monomial's coefficient in R6
    is exactly zero; (b) no stored non-normal term of R6 has zero square
    divisor (the structural converse of (a)); (c) the nine-term kernel sum
    vanishes for each resonant pair, via exact rational arithmetic.
    """
    if r6 is None:
        r6 = compute_R6(M)
    report = KtildeReport(truncation=M, checked=0)
    for mono in iter_resonant_monomials(M):
        report.checked += 1
        c = r6.coefficient(mono)
        if not c.is_zero:
            report.coefficient_violations.append((mono, c))
        pair = TriplePair.of(mono.plus, mono.minus)
        _, II = nine_term_sums(pair)
        if II != 0:
            report.tau_sum_failures.append((mono, II))
    for mono, coeff in r6.terms():
        if not mono.is_normal() and mono.square_divisor() == 0:
            report.structural_violations.append((mono, coeff))
    return report


# -- the sextic generator -----------------------------------------------------------


def split_r6(r6: PolyHamiltonian) -> tuple[PolyHamiltonian, PolyHamiltonian]:
    """(action part, non-resonant non-normal part) of R6.

    Raises if any stored non-normal term has zero divisor; such a term would
    be a resonant survivor and signals a classification bug.
    """
    normal, rest = split_normal(r6)
    for mono, coeff in rest.terms():
        if mono.square_divisor() == 0:
            raise ArithmeticError(
                f"resonant term {mono} with coefficient {coeff} survived in R6"
            )
    return normal, rest


def build_F6(M: int, r6: PolyHamiltonian | None = None) -> PolyHamiltonian:
    """Sextic generator: i/(square divisor) times the non-resonant part."""
    if r6 is None:
        r6 = compute_R6(M)
    _, qtilde = split_r6(r6)
    items = []
    for mono, coeff in qtilde.terms():
        d = mono.square_divisor()
        items.append((mono, coeff.mul_imag_int(1).scaled(Fraction(1, d))))
    return PolyHamiltonian.from_terms(M, items)


# -- sextuple small-divisor bound ------------------------------------------------------


def sextuple_divisor(t) -> int:
    return sum((1 if i % 2 == 0 else -1) * v * v for i, v in enumerate(t))


def sextuple_momentum(t) -> int:
    return sum((1 if i % 2 == 0 else -1) * v for i, v in enumerate(t))


def in_delta_tilde(t) -> bool:
    return (
        len(t) == 6
        and all(v != 0 for v in t)
        and sextuple_momentum(t) == 0
        and sextuple_divisor(t) != 0
    )


@dataclass(frozen=True)
class SextupleReport:
    tuple: tuple[int, ...]
    divisor: int
    stars: tuple[int, ...]
    excluded: bool
    holds: bool | None  # None for the excluded case


def sextuple_bound_check(t) -> SextupleReport:
    """Classify a non-resonant sextuple and check the small-divisor bound.

    Normalization sorts each parity class by decreasing absolute value and
    puts the overall largest in the leading unbarred slot.  The excluded case
    is a shared leading mode (equal with sign) that dominates the third star
    squared by a factor above 100; those tuples are the reducible family
    handled by the explicit closed form, not by this bound.  For everything
    else the bound

        |divisor| >= j1*^3 / (100 (j2* j3* j4* j5* j6*)^2)

    is asserted exactly in integers.
    """
    t = tuple(int(v) for v in t)
    if not in_delta_tilde(t):
        raise ValueError(f"{t} is not in the non-resonant sextuple set")
    d = sextuple_divisor(t)
    plus = sorted(t[0::2], key=abs, reverse=True)
    minus = sorted(t[1::2], key=abs, reverse=True)
    stars = tuple(sorted((abs(v) for v in t), reverse=True))
    top = stars[0]
    shared_top = any(
        abs(v) == top and v in plus and v in minus for v in (top, -top)
    )
    excluded = shared_top and top > 100 * stars[2] ** 2
    if excluded:
        return SextupleReport(t, d, stars, True, None)
    tail = stars[1] * stars[2] * stars[3] * stars[4] * stars[5]
    holds = 100 * abs(d) * tail * tail >= top**3
    return SextupleReport(t, d, stars, False, bool(holds))


def exhaustive_sextuple_audit(max_abs: int = 8) -> dict:
    """Vectorized bound check over all non-resonant sextuples within max_abs.

    The sixth entry is solved from zero momentum.  At desk scale the excluded
    case cannot occur (it needs a leading star above 100 j3*^2 >= 100), but
    the classification is still applied for fidelity.
    """
    values = np.array([v for v in range(-max_abs, max_abs + 1) if v != 0])
    grids = np.meshgrid(values, values, values, values, values, indexing="ij")
    j1, j2, j3, j4, j5 = (g.ravel().astype(np.int64) for g in grids)
    j6 = j1 - j2 + j3 - j4 + j5
    ok = (j6 != 0) & (np.abs(j6) <= max_abs)
    cols = [c[ok] for c in (j1, j2, j3, j4, j5, j6)]
    d = (
        cols[0] ** 2 - cols[1] ** 2 + cols[2] ** 2
        - cols[3] ** 2 + cols[4] ** 2 - cols[5] ** 2
    )
    nz = d != 0
    cols = [c[nz] for c in cols]
    d = d[nz]
    arr = np.stack(cols, axis=1)
    stars = np.sort(np.abs(arr), axis=1)[:, ::-1]
    top = stars[:, 0]
    plus = arr[:, 0::2]
    minus = arr[:, 1::2]
    shared = np.zeros(len(d), dtype=bool)
    for sign in (1, -1):
        v = sign * top
        shared |= (plus == v[:, None]).any(axis=1) & (minus == v[:, None]).any(axis=1)
    excluded = shared & (top > 100 * stars[:, 2] ** 2)
    tail = stars[:, 1] * stars[:, 2] * stars[:, 3] * stars[:, 4] * stars[:, 5]
    holds = 100 * np.abs(d) * tail * tail >= top**3
    bad = ~holds & ~excluded
    violations = [tuple(int(v) for v in arr[i]) for i in np.flatnonzero(bad)[:20]]
    return {
        "checked": int(len(d)),
        "excluded": int(excluded.sum()),
        "violations": violations,
        "max_abs": max_abs,
    }


def random_sextuple_audit(n_samples: int, max_abs: int, seed: int) -> dict:
    """Random non-resonant sextuples at large sizes; exact integer math."""
    rng = np.random.default_rng(np.random.Philox(key=seed))
    checked = 0
    excluded = 0
    violations = []
    while checked < n_samples:
        vals = [int(v) for v in rng.integers(-max_abs, max_abs + 1, size=5)]
        if any(v == 0 for v in vals):
            continue
        j6 = vals[0] - vals[1] + vals[2] - vals[3] + vals[4]
        if j6 == 0 or abs(j6) > max_abs:
            continue
        t = (*vals, j6)
        if sextuple_divisor(t) == 0:
            continue
        rep = sextuple_bound_check(t)
        checked += 1
        if rep.excluded:
            excluded += 1
        elif not rep.holds:
            violations.append(rep)
    return {
        "checked": checked,
        "excluded": excluded,
        "violations": violations,
        "max_abs": max_abs,
    }


# -- reducible closed-form cross-check --------------------------------------------------


def build_Qtilde0(M: int, n: int) -> PolyHamiltonian:
    """Closed form of the |q_n|^2-reducible non-resonant terms:

        (1/16pi^2) sum over Delta quadruples (j,k,l,m) avoiding the value n of
        (4 tau(j,n,k) - tau(j,n,l) - tau(k,n,m)) q_j qbar_k q_l qbar_m |q_n|^2

    aggregated onto canonical monomials.  Valid whenever n is not among the
    quadruple values; the derivation needs no size condition on n, only the
    stated disjointness, so the comparison is exact at desk scale too.
    """
    if n == 0 or abs(n) > M:
        raise ValueError("designated mode must lie in the window")
    window = mode_range(M)
    acc: dict[Monomial, Fraction] = {}
    for j in window:
        for k in window:
            if k == j:
                continue
            for l in window:
                m = j - k + l
                if m == 0 or abs(m) > M or m == j:
                    continue
                if n in (j, k, l, m):
                    continue
                kernel = 4 * tau(j, n, k) - tau(j, n, l) - tau(k, n, m)
                mono = Monomial.of((j, l, n), (k, m, n))
                acc[mono] = acc.get(mono, Fraction(0)) + kernel
    items = [
        (mono, ExactCoeff.real(f / 16, pi_power=2)) for mono, f in acc.items()
    ]
    return PolyHamiltonian.from_terms(M, items)


@dataclass
class Qtilde0Report:
    truncation: int
    designated_mode: int
    n_compared: int
    mismatches: list
    regime_satisfied: bool  # paper-size regime |n| > 100 max(window modes)^2

    @property
    def passed(self) -> bool:
        return not self.mismatches


def qtilde0_crosscheck(
    M: int, n: int, r6: PolyHamiltonian | None = None
) -> Qtilde0Report:
    """Term-by-term comparison of the closed-form reducible part against the
    subtraction-derived non-resonant part of R6, for shared mode n."""
    if r6 is None:
        r6 = compute_R6(M)
    _, qtilde = split_r6(r6)
    extracted: dict[Monomial, ExactCoeff] = {}
    regime = True
    for mono, coeff in qtilde.terms():
        if mono.plus.count(n) == 1 and mono.minus.count(n) == 1:
            extracted[mono] = coeff
            window_max_sq = max(v * v for v in mono.plus + mono.minus if v != n)
            if not abs(n) > 100 * window_max_sq:
                regime = False
    constructed = {m: c for m, c in build_Qtilde0(M, n).terms()}
    mismatches = []
    for mono in sorted(
        set(extracted) | set(constructed), key=lambda m: (m.plus, m.minus)
    ):
        a = extracted.get(mono, ExactCoeff.zero())
        b = constructed.get(mono, ExactCoeff.zero())
        if a != b:
            mismatches.append((mono, a, b))
    return Qtilde0Report(
        truncation=M,
        designated_mode=n,
        n_compared=len(set(extracted) | set(constructed)),
        mismatches=mismatches,
        regime_satisfied=regime,
    )


def coefficient_growth_audit_f6(F6: PolyHamiltonian):
    """Growth audit of the sextic generator against the steep-head shape
    (j1*)^(-7/2) (j2*...j6*)^(5/2); the constant is a regression value."""
    from .order4 import coefficient_growth_audit

    return coefficient_growth_audit(F6, Fraction(5, 2), Fraction(7, 2))


def tau_bound_check(j: int, k: int, l: int, m: int, n: int) -> bool:
    """|tau(j,n,k)|, |tau(j,n,l)|, |tau(k,n,m)| < 2/|n|, exactly.

    Requires the size regime |n| > 100 max(j^2,k^2,l^2,m^2) of the reducible
    family; raises otherwise.
    """
    if not in_delta(j, k, l, m):
        raise ValueError("window quadruple must be non-resonant")
    if not abs(n) > 100 * max(j * j, k * k, l * l, m * m):
        raise ValueError("designated mode too small for the reducible regime")
    two_over_n = Fraction(2, abs(n))
    return all(
        abs(tau(a, n, b)) < two_over_n
        for a, b in ((j, k), (j, l), (k, m))
    )
