"""Angle-set descriptions of isometry-invariant triangle families and their
classification into the four boundedness regimes.

An angle value is either a float (inexact) or an exact combination
q0 + q1 * pi with rational q0, q1, so that the predicates "angle sum equals
pi" and "some angle is zero" are decidable without tolerances whenever the
inputs are exact.  Descriptions are finitely generated: a list of atoms plus
affine-in-1/k sequences alpha(k) = base + coef / k whose limits are exact.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .triangles import AngleTriple

_S_EQ_PI_TOL = 1e-12


class NotInSimplexError(ValueError):
    """Angle triple outside the admissible simplex (components >= 0, sum <= pi)."""


class EmptyDescriptionError(ValueError):
    """Description has no atoms and no sequences."""


class WrongRegimeError(ValueError):
    """An experiment was invoked on a description of the wrong regime."""


@dataclass(frozen=True, slots=True)
class ExactAngle:
    """Exact angle value q0 + q1 * pi with rational coefficients."""

    q0: Fraction = Fraction(0)
    q1: Fraction = Fraction(0)

    def value(self) -> float:
        return float(self.q0) + float(self.q1) * math.pi

    def is_zero(self) -> bool:
        return self.q0 == 0 and self.q1 == 0

    def __add__(self, other: "ExactAngle") -> "ExactAngle":
        return ExactAngle(self.q0 + other.q0, self.q1 + other.q1)

    def __sub__(self, other: "ExactAngle") -> "ExactAngle":
        return ExactAngle(self.q0 - other.q0, self.q1 - other.q1)

    def over(self, k: int) -> "ExactAngle":
        return ExactAngle(self.q0 / k, self.q1 / k)

    def __le__(self, other: "ExactAngle") -> bool:
        return self.value() <= other.value() or self == other

    def sign(self) -> int:
        if self.is_zero():
            return 0
        v = self.value()
        # pi is irrational, so a nonzero q0 + q1 pi never vanishes; the float
        # value decides the sign safely away from zero.
        return 1 if v > 0 else -1


PI = ExactAngle(Fraction(0), Fraction(1))

AngleValue = Union[ExactAngle, float]

_PI_STRING = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?:(?P<num>\d+)\s*(?:/\s*(?P<den>\d+))?\s*)?(?P<pi>pi)?\s*$",
    re.IGNORECASE,
)


def parse_angle(raw: object) -> AngleValue:
    """Parse a JSON angle: int -> exact rational, float -> inexact,
    strings like "pi", "1/3 pi", "2 pi", "3/4" -> exact."""
    if isinstance(raw, ExactAngle):
        return raw
    if isinstance(raw, bool):
        raise ValueError("boolean is not an angle")
    if isinstance(raw, int):
        return ExactAngle(Fraction(raw), Fraction(0))
    if isinstance(raw, float):
        if raw == int(raw):
            return ExactAngle(Fraction(int(raw)), Fraction(0))
        return raw
    if isinstance(raw, str):
        m = _PI_STRING.match(raw)
        if not m or (m.group("num") is None and m.group("pi") is None):
            raise ValueError(f"cannot parse angle string {raw!r}")
        num = int(m.group("num")) if m.group("num") else 1
        den = int(m.group("den")) if m.group("den") else 1
        q = Fraction(num, den)
        if m.group("sign") == "-":
            q = -q
        if m.group("pi"):
            return ExactAngle(Fraction(0), q)
        return ExactAngle(q, Fraction(0))
    raise ValueError(f"cannot parse angle {raw!r}")


def _as_float(v: AngleValue) -> float:
    return v.value() if isinstance(v, ExactAngle) else float(v)


def _all_exact(vals: Iterable[AngleValue]) -> bool:
    return all(isinstance(v, ExactAngle) for v in vals)


class Stratum(enum.Enum):
    """Partition of the admissible simplex by s(alpha) = pi and p(alpha) = 0."""

    S0 = "S0"  # s < pi, p > 0
    S1 = "S1"  # s = pi, p > 0
    S2 = "S2"  # s < pi, p = 0
    S3 = "S3"  # s = pi, p = 0


class Regime(enum.Enum):
    """The four alternatives, ordered by precedence IV > III > II > I."""

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


_REGIME_ORDER = {Regime.I: 0, Regime.II: 1, Regime.III: 2, Regime.IV: 3}


def _stratum_from_predicates(s_eq_pi: bool, p_zero: bool) -> Stratum:
    if s_eq_pi:
        return Stratum.S3 if p_zero else Stratum.S1
    return Stratum.S2 if p_zero else Stratum.S0


def _stratum_exact(vals: Sequence[ExactAngle]) -> Stratum:
    total = ExactAngle()
    for v in vals:
        if v.sign() < 0:
            raise NotInSimplexError(f"negative angle {v.value()}")
        total = total + v
    gap = PI - total
    if gap.sign() < 0:
        raise NotInSimplexError(f"angle sum {total.value()} exceeds pi")
    return _stratum_from_predicates(gap.is_zero(), any(v.is_zero() for v in vals))


def _stratum_float(vals: Sequence[float]) -> Stratum:
    for v in vals:
        if v < 0.0:
            raise NotInSimplexError(f"negative angle {v}")
    s = math.fsum(vals)
    if s > math.pi + _S_EQ_PI_TOL:
        raise NotInSimplexError(f"angle sum {s} exceeds pi")
    return _stratum_from_predicates(abs(s - math.pi) <= _S_EQ_PI_TOL,
                                    any(v == 0.0 for v in vals))


def stratum_of(alpha: AngleTriple | Sequence, exact: bool = False) -> Stratum:
    """Stratum of an angle triple.

    exact mode requires components parseable as exact values (rational plus
    rational multiples of pi); float mode decides s = pi within 1e-12 and
    p = 0 by exact-zero components.
    """
    comps: Sequence = alpha.as_tuple() if isinstance(alpha, AngleTriple) else tuple(alpha)
    if exact:
        vals = [parse_angle(c) for c in comps]
        if not _all_exact(vals):
            raise ValueError("exact mode needs exact angle components")
        return _stratum_exact(vals)  # type: ignore[arg-type]
    return _stratum_float([_as_float(parse_angle(c)) for c in comps])


def _triple_stratum(vals: Sequence[AngleValue]) -> Stratum:
    if _all_exact(vals):
        return _stratum_exact(vals)  # type: ignore[arg-type]
    return _stratum_float([_as_float(v) for v in vals])


@dataclass(frozen=True)
class AngleSequence:
    """Parametric family alpha(k) = base + coef / k for integers k >= 1."""

    base: tuple[AngleValue, AngleValue, AngleValue]
    coef: tuple[AngleValue, AngleValue, AngleValue]

    def member(self, k: int) -> tuple[AngleValue, AngleValue, AngleValue]:
        if k < 1:
            raise ValueError("sequence index starts at 1")
        out = []
        for b, c in zip(self.base, self.coef):
            if isinstance(b, ExactAngle) and isinstance(c, ExactAngle):
                out.append(b + c.over(k))
            else:
                out.append(_as_float(b) + _as_float(c) / k)
        return tuple(out)  # type: ignore[return-value]

    def member_floats(self, k: int) -> tuple[float, float, float]:
        return tuple(_as_float(v) for v in self.member(k))  # type: ignore[return-value]

    def limit(self) -> tuple[AngleValue, AngleValue, AngleValue]:
        return self.base


def _special_indices(seq: AngleSequence) -> set[int]:
    """Integer k >= 1 where a member's stratum can differ from the generic one.

    Candidates solve s(k) = pi (one linear equation in 1/k) or a component
    b_i + c_i / k = 0.
    """
    out: set[int] = set()

    def solve(num: AngleValue, den: AngleValue) -> None:
        # candidates k with num / k = den, i.e. k = num / den
        if isinstance(num, ExactAngle) and isinstance(den, ExactAngle):
            if den.is_zero():
                return
            # require num = k * den componentwise for an integer k
            k = None
            if den.q0 != 0:
                k = num.q0 / den.q0
            if den.q1 != 0:
                k2 = num.q1 / den.q1
                if k is None:
                    k = k2
                elif k != k2:
                    return
            if k is None:
                return
            if (den.q0 == 0 and num.q0 != 0) or (den.q1 == 0 and num.q1 != 0):
                return
            if k.denominator == 1 and k >= 1:
                out.add(int(k))
            return
        nv, dv = _as_float(num), _as_float(den)
        if dv == 0.0:
            return
        k = nv / dv
        kr = round(k)
        if kr >= 1 and abs(k - kr) < 1e-9:
            out.add(int(kr))

    sb = _sum_values(seq.base)
    sc = _sum_values(seq.coef)
    pi_minus_sb = _sub_values(_pi_value(), sb)
    solve(sc, pi_minus_sb)
    for b, c in zip(seq.base, seq.coef):
        solve(_neg_value(c), b)
    return out


def _pi_value() -> AngleValue:
    return PI


def _sum_values(vals: Sequence[AngleValue]) -> AngleValue:
    if _all_exact(vals):
        total = ExactAngle()
        for v in vals:
            total = total + v  # type: ignore[operator]
        return total
    return math.fsum(_as_float(v) for v in vals)


def _sub_values(a: AngleValue, b: AngleValue) -> AngleValue:
    if isinstance(a, ExactAngle) and isinstance(b, ExactAngle):
        return a - b
    return _as_float(a) - _as_float(b)


def _neg_value(a: AngleValue) -> AngleValue:
    if isinstance(a, ExactAngle):
        return ExactAngle(-a.q0, -a.q1)
    return -a


def _generic_member_stratum(seq: AngleSequence) -> Stratum:
    """Stratum shared by all members with k outside the special set."""
    sb = _sum_values(seq.base)
    sc = _sum_values(seq.coef)
    if isinstance(sb, ExactAngle) and isinstance(sc, ExactAngle):
        if sc.is_zero():
            s_eq_pi = (PI - sb).is_zero()
        else:
            s_eq_pi = False
    else:
        s_eq_pi = (abs(_as_float(sc)) == 0.0
                   and abs(_as_float(sb) - math.pi) <= _S_EQ_PI_TOL)
    p_zero = False
    for b, c in zip(seq.base, seq.coef):
        if isinstance(b, ExactAngle) and isinstance(c, ExactAngle):
            if b.is_zero() and c.is_zero():
                p_zero = True
        elif _as_float(b) == 0.0 and _as_float(c) == 0.0:
            p_zero = True
    return _stratum_from_predicates(s_eq_pi, p_zero)


def _validate_sequence(seq: AngleSequence) -> None:
    for k in (1, 2):
        for v in seq.member(k):
            if _as_float(_sub_values(v, ExactAngle())) < -1e-15 if isinstance(v, ExactAngle) else _as_float(v) < -1e-15:
                raise NotInSimplexError(f"sequence member alpha({k}) has a negative component")
    # components b + c/k are monotone in k; nonnegativity at k = 1 and at the
    # limit covers every k, and similarly for the angle-sum ceiling.
    for v in seq.base:
        if _as_float(v) < -1e-15:
            raise NotInSimplexError("sequence limit has a negative component")
    s1 = _as_float(_sum_values(seq.member(1)))
    sb = _as_float(_sum_values(seq.base))
    if s1 > math.pi + _S_EQ_PI_TOL or sb > math.pi + _S_EQ_PI_TOL:
        raise NotInSimplexError("sequence leaves the simplex")


@dataclass(frozen=True)
class AngleSetDescription:
    """Finitely generated angle set: atoms plus affine-in-1/k sequences."""

    atoms: tuple = ()
    sequences: tuple = ()

    def __post_init__(self) -> None:
        atoms = tuple(tuple(parse_angle(c) for c in a) for a in self.atoms)
        seqs = []
        for s in self.sequences:
            if not isinstance(s, AngleSequence):
                s = AngleSequence(
                    tuple(parse_angle(c) for c in s[0]),
                    tuple(parse_angle(c) for c in s[1]),
                )
            seqs.append(s)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "sequences", tuple(seqs))
        for a in self.atoms:
            _triple_stratum(a)  # raises if outside the simplex
        for s in self.sequences:
            _validate_sequence(s)

    def closure_strata(self) -> dict[Stratum, list]:
        """Strata hit by atoms, all sequence members, and sequence limits."""
        hits: dict[Stratum, list] = {st: [] for st in Stratum}
        for a in self.atoms:
            hits[_triple_stratum(a)].append(("atom", tuple(_as_float(v) for v in a)))
        for si, seq in enumerate(self.sequences):
            hits[_triple_stratum(seq.base)].append(("limit", si))
            generic = _generic_member_stratum(seq)
            hits[generic].append(("members", si))
            for k in sorted(_special_indices(seq)):
                hits[_triple_stratum(seq.member(k))].append(("member", si, k))
        return {st: v for st, v in hits.items() if v}

    def constructible_samples(self, k_max: int = 64) -> list[AngleTriple]:
        """Angle triples of actual triangles: s < pi and positive-angle floor."""
        out: list[AngleTriple] = []
        seen: set[tuple[float, float, float]] = set()

        def push(vals: Sequence[AngleValue]) -> None:
            f = tuple(_as_float(v) for v in vals)
            if f in seen:
                return
            if math.fsum(f) >= math.pi - 1e-12:
                return
            if any(0.0 < c < 1e-6 for c in f):
                return
            seen.add(f)
            out.append(AngleTriple(*f))

        for a in self.atoms:
            push(a)
        for seq in self.sequences:
            for k in range(1, k_max + 1):
                push(seq.member(k))
        return out


def classify(desc: AngleSetDescription) -> tuple[Regime, dict]:
    """Regime of the family, with the witnessing strata memberships.

    Precedence: any closure point in S3 gives IV, else S2 gives III, else S1
    gives II, else I.
    """
    if not desc.atoms and not desc.sequences:
        raise EmptyDescriptionError("description has no atoms and no sequences")
    hits = desc.closure_strata()
    if Stratum.S3 in hits:
        regime = Regime.IV
    elif Stratum.S2 in hits:
        regime = Regime.III
    elif Stratum.S1 in hits:
        regime = Regime.II
    else:
        regime = Regime.I
    witnesses = {st.value: hits[st] for st in hits}
    return regime, witnesses


def regime_of(desc: AngleSetDescription) -> Regime:
    return classify(desc)[0]


def description_from_json(doc: str | dict) -> AngleSetDescription:
    """Parse {atoms: [[a,b,c], ...], sequences: [{base, coef}, ...]}."""
    rec = json.loads(doc) if isinstance(doc, str) else doc
    atoms = [tuple(a) for a in rec.get("atoms", [])]
    seqs = [(tuple(s["base"]), tuple(s["coef"])) for s in rec.get("sequences", [])]
    return AngleSetDescription(tuple(atoms), tuple(seqs))


# The four canonical example descriptions, one per regime.
CANONICAL_DESCRIPTIONS: dict[str, dict] = {
    "I": {"atoms": [[0.5, 0.5, 0.5]]},
    "II": {"sequences": [{"base": ["1/3 pi", "1/3 pi", "1/3 pi"], "coef": [0, 0, -1]}]},
    "III": {"sequences": [{"base": [0, 1, 1], "coef": [1, 0, 0]}]},
    "IV": {"sequences": [{"base": [0, "1/2 pi", "1/2 pi"], "coef": [1, "-1/2", "-1/2"]}]},
}
