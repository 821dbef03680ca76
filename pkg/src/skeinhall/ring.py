"""Exact arithmetic in R = Z[q^{+-1}, (q-1)^{-1}].

Every element is kept in the canonical form

    P(q) / ( q^a (q-1)^b ),   a in Z, b >= 0,

where P has integer coefficients, P(0) != 0 (no factor q) and P(1) != 0
(no factor q-1).  Zero is (0, 0, 0).  Equality of canonical forms is
structural, so RingElem is hashable and usable as a dict key.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import json
import re


def _poly_trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _poly_add(a, b):
    n = max(len(a), len(b))
    return _poly_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                       for i in range(n)])


def _poly_mul(a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_eval(a, x):
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _poly_divmod_qm1(a):
    """Divide by (q-1); remainder is a constant (value at 1)."""
    quot = [0] * max(len(a) - 1, 0)
    carry = 0
    for i in range(len(a) - 1, 0, -1):
        carry = a[i] + carry
        quot[i - 1] = carry
    rem = a[0] + carry if a else 0
    return _poly_trim(quot), rem


@dataclass(frozen=True)
class RingElem:
    """Canonical element of Z[q^{+-1}, (q-1)^{-1}]."""

    num: tuple  # integer coefficients of P, low degree first
    q_exp: int  # power of q in the denominator (may be negative)
    qm1_exp: int  # power of (q-1) in the denominator, >= 0

    # -- constructors ------------------------------------------------------

    @staticmethod
    def make(num, q_exp=0, qm1_exp=0) -> "RingElem":
        num = _poly_trim(num)
        if not num:
            return RingElem((), 0, 0)
        # strip factors of q from the numerator
        k = 0
        while num[k] == 0:
            k += 1
        if k:
            num = num[k:]
            q_exp -= k
        # cancel (q-1) factors against the denominator
        while qm1_exp > 0:
            quot, rem = _poly_divmod_qm1(num)
            if rem != 0:
                break
            num = quot
            qm1_exp -= 1
        if qm1_exp < 0:
            raise ValueError("qm1_exp must be >= 0")
        return RingElem(num, q_exp, qm1_exp)

    @staticmethod
    def from_int(n: int) -> "RingElem":
        return RingElem.make((n,))

    @staticmethod
    def zero() -> "RingElem":
        return RingElem((), 0, 0)

    @staticmethod
    def one() -> "RingElem":
        return RingElem((1,), 0, 0)

    @staticmethod
    def q(n: int = 1) -> "RingElem":
        """q^n for any integer n."""
        if n >= 0:
            return RingElem.make((0,) * n + (1,))
        return RingElem.make((1,), q_exp=-n)

    @staticmethod
    def qm1_inv(n: int = 1) -> "RingElem":
        """(q-1)^{-n}, n >= 0."""
        return RingElem.make((1,), qm1_exp=n)

    @staticmethod
    def qm1(n: int = 1) -> "RingElem":
        """(q-1)^n, n >= 0."""
        p = (1,)
        for _ in range(n):
            p = _poly_mul(p, (-1, 1))
        return RingElem.make(p)

    # -- arithmetic --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def __add__(self, other: "RingElem") -> "RingElem":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        qa = max(self.q_exp, other.q_exp)
        ba = max(self.qm1_exp, other.qm1_exp)
        pa = self._scaled_num(qa, ba)
        pb = other._scaled_num(qa, ba)
        return RingElem.make(_poly_add(pa, pb), qa, ba)

    def _scaled_num(self, q_exp, qm1_exp):
        p = self.num
        dq = q_exp - self.q_exp
        if dq:
            p = (0,) * dq + p
        for _ in range(qm1_exp - self.qm1_exp):
            p = _poly_mul(p, (-1, 1))
        return p

    def __neg__(self) -> "RingElem":
        return RingElem(tuple(-c for c in self.num), self.q_exp, self.qm1_exp)

    def __sub__(self, other: "RingElem") -> "RingElem":
        return self + (-other)

    def __mul__(self, other: "RingElem") -> "RingElem":
        if self.is_zero() or other.is_zero():
            return RingElem.zero()
        return RingElem.make(_poly_mul(self.num, other.num),
                             self.q_exp + other.q_exp,
                             self.qm1_exp + other.qm1_exp)

    def __rmul__(self, n: int) -> "RingElem":
        return RingElem.from_int(n) * self

    # -- specialization ----------------------------------------------------

    def specialize(self, q0: int) -> Fraction:
        """Exact value at q = q0; rejects q0 in {0, 1}."""
        if q0 in (0, 1):
            raise ValueError("specialization requires q0 >= 2 (q0 not in {0,1})")
        if self.is_zero():
            return Fraction(0)
        val = _poly_eval(self.num, Fraction(q0))
        return val / (Fraction(q0) ** self.q_exp * Fraction(q0 - 1) ** self.qm1_exp)

    # -- presentation ------------------------------------------------------

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.num):
            if c == 0:
                continue
            if i == 0:
                terms.append(f"{c}")
            elif i == 1:
                terms.append(f"{c}*q" if c not in (1, -1) else ("q" if c == 1 else "-q"))
            else:
                terms.append(f"{c}*q^{i}" if c not in (1, -1) else (f"q^{i}" if c == 1 else f"-q^{i}"))
        p = " + ".join(terms).replace("+ -", "- ")
        denom = []
        if self.q_exp:
            denom.append(f"q^{self.q_exp}")
        if self.qm1_exp:
            denom.append(f"(q-1)^{self.qm1_exp}" if self.qm1_exp != 1 else "(q-1)")
        if denom:
            return f"({p}) / {' '.join(denom)}"
        return p

    def to_json(self) -> dict:
        return {"num": list(self.num), "q_exp": self.q_exp, "qm1_exp": self.qm1_exp}

    @staticmethod
    def from_json(d) -> "RingElem":
        e = RingElem.make(tuple(d["num"]), d["q_exp"], d["qm1_exp"])
        if (e.num, e.q_exp, e.qm1_exp) != (_poly_trim(d["num"]), d["q_exp"], d["qm1_exp"]):
            raise ValueError("non-canonical RingElem JSON")
        return e

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @staticmethod
    def loads(s: str) -> "RingElem":
        return RingElem.from_json(json.loads(s))

    # string form "P / q^a (q-1)^b" round trip
    _STR_RE = re.compile(r"^\((?P<p>.*)\) / (?P<d>.*)$")

    @staticmethod
    def parse(s: str) -> "RingElem":
        s = s.strip()
        if s == "0":
            return RingElem.zero()
        m = RingElem._STR_RE.match(s)
        p_str, d_str = (m.group("p"), m.group("d")) if m else (s, "")
        coeffs: dict = {}
        for t in re.finditer(r"([+-]?[^+-]+)", p_str.replace(" ", "")):
            term = t.group(1)
            if "q" not in term:
                coeffs[0] = coeffs.get(0, 0) + int(term)
                continue
            c_str, _, e_str = term.partition("q")
            c = {"": 1, "+": 1, "-": -1}.get(c_str.rstrip("*"), None)
            if c is None:
                c = int(c_str.rstrip("*"))
            e = int(e_str[1:]) if e_str.startswith("^") else 1
            coeffs[e] = coeffs.get(e, 0) + c
        num = [coeffs.get(i, 0) for i in range(max(coeffs) + 1)] if coeffs else []
        q_exp = qm1_exp = 0
        for part in d_str.split():
            if part.startswith("q^"):
                q_exp = int(part[2:])
            elif part.startswith("(q-1)"):
                qm1_exp = int(part[6:]) if part.startswith("(q-1)^") else 1
        return RingElem.make(tuple(num), q_exp, qm1_exp)


def interpolate(values, max_deg=8, max_q=6, max_qm1=6, extra_check=2):
    """Recover a RingElem from exact values at distinct primes.

    ``values``: list of (q0, Fraction).  Tries denominators q^a (q-1)^b with
    a <= max_q, b <= max_qm1 and numerator degree <= max_deg, smallest first;
    requires the fit to reproduce ``extra_check`` held-out evaluation points.
    Raises ValueError when the degree bound is exceeded.
    """
    pts = list(values)
    if len(pts) < 3:
        raise ValueError("need at least 3 evaluation points")
    for b in range(max_qm1 + 1):
        for a in range(max_q + 1):
            for deg in range(min(max_deg, len(pts) - extra_check - 1) + 1):
                fit_pts = pts[: deg + 1]
                chk_pts = pts[deg + 1:]
                if len(chk_pts) < extra_check:
                    continue
                coeffs = _fit_poly(fit_pts, a, b, deg)
                if coeffs is None:
                    continue
                cand = RingElem.make(coeffs, a, b)
                if all(cand.specialize(q0) == v for q0, v in pts):
                    return cand
    raise ValueError("interpolation degree bound exceeded")


def _fit_poly(pts, a, b, deg):
    """Solve for integer coefficients of P with P(q)/q^a(q-1)^b = v."""
    # Vandermonde solve over Fraction
    n = deg + 1
    rows = []
    rhs = []
    for q0, v in pts[:n]:
        rows.append([Fraction(q0) ** i for i in range(n)])
        rhs.append(v * Fraction(q0) ** a * Fraction(q0 - 1) ** b)
    sol = _solve_exact(rows, rhs)
    if sol is None:
        return None
    if any(s.denominator != 1 for s in sol):
        return None
    return tuple(int(s) for s in sol)


def _solve_exact(rows, rhs):
    n = len(rows)
    m = [list(r) + [v] for r, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]
