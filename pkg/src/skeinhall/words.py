"""Basis letters and words for the disk and annulus skein algebras, the
dictionary to module-category objects, and elements over the coefficient ring.

Disk letters are pairs (i, j) with 0 < j - i <= n indexing an arc between the
marked points i mod (n+1) and j mod (n+1).  The shift index and grading label
of a letter are

    s(i, j) = (i + j + floor((n+1)/2)) // (n+1),
    mu(i, j) = -(i + j) + s(i, j) * n,

so that the window letters (-(n+1)/2 <= i+j < (n+1)/2) are the shift-0
objects and the rotation (i, j) -> (j, i + n + 1) is the object shift by one.
The dictionary sends a window letter to the interval [min+1, max] of its
endpoints; shifted letters go to the same interval with their shift index.

Annulus letters are (k, m): the curve winding k > 0 times with all labels m;
their objects are the unipotent-or-not classes at shift m.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import ANNULUS, FrontWord, disk, disk_front, stack
from .ring import RingElem


# ---------------------------------------------------------------------------
# disk letters


def disk_shift_index(i, j, n):
    return (i + j + (n + 1) // 2) // (n + 1)


def disk_mu_ends(i, j, n):
    """(mu at the lower-vertex end, mu at the higher-vertex end): the label
    at the p_{a-1} end of the interval [a,b][s] is a - s, at the p_b end
    it is b - s."""
    (a, b), s = disk_letter_object(i, j, n)
    return {a - 1: a - s, b: b - s}


def disk_verts(i, j, n):
    return (i % (n + 1), j % (n + 1))


def disk_letter_valid(i, j, n):
    return 0 < j - i <= n


def disk_letter_object(i, j, n):
    """(interval (a, b), shift) of the letter."""
    va, vb = disk_verts(i, j, n)
    lo, hi = min(va, vb), max(va, vb)
    return ((lo + 1, hi), disk_shift_index(i, j, n))


def disk_object_letter(interval, shift, n):
    """Inverse dictionary: ((a, b), shift) -> letter (i, j)."""
    a, b = interval
    va, vb = a - 1, b
    for i in range(-2 * (n + 1) - abs(shift) * (n + 1) - n - 1,
                   2 * (n + 1) + abs(shift) * (n + 1) + n + 2):
        for j in range(i + 1, i + n + 1):
            if set(disk_verts(i, j, n)) == {va, vb} and \
                    disk_shift_index(i, j, n) == shift:
                return (i, j)
    raise ValueError(f"no letter for interval {interval} shift {shift}")


def disk_rotate(i, j, n):
    """The object shift by one: E_{i,j}[1] = E_{j-(n+1), i} in letter terms
    (labels drop by one)."""
    return (j - (n + 1), i)


def disk_word_sorted(letters):
    """Canonical order: i+j non-increasing, ties lexicographic."""
    return tuple(sorted(letters, key=lambda ij: (-(ij[0] + ij[1]), ij)))


def disk_word_is_sorted(letters):
    return tuple(letters) == disk_word_sorted(letters)


def disk_word_front(n_plus_1, letters, closed_events=()) -> FrontWord:
    """The stacked-arc front of a disk word (first letter at the bottom)."""
    n = n_plus_1 - 1
    chords = []
    for idx, (i, j) in enumerate(letters):
        if not disk_letter_valid(i, j, n):
            raise ValueError(f"bad letter {(i, j)} for n={n}")
        va, vb = disk_verts(i, j, n)
        mus = disk_mu_ends(i, j, n)
        chords.append((va, vb, mus[va], mus[vb], (idx, 1), (idx, 0)))
    return disk_front(n_plus_1, chords, closed_events)


# ---------------------------------------------------------------------------
# annulus letters


def annulus_letter_front(k, m=0) -> FrontWord:
    """The curve winding k times at object shift m (grading labels -m)."""
    if k < 1:
        raise ValueError("winding must be positive")
    return FrontWord(ANNULUS, (-m,) * k,
                     tuple(("X", i) for i in range(k - 2, -1, -1)))


def annulus_word_sorted(letters):
    """letters: (k, m); canonical: m non-increasing, then k non-increasing."""
    return tuple(sorted(letters, key=lambda km: (-km[1], -km[0])))


def annulus_word_is_sorted(letters):
    return tuple(letters) == annulus_word_sorted(letters)


def annulus_word_front(letters) -> FrontWord:
    fw = None
    for k, m in letters:
        f = annulus_letter_front(k, m)
        fw = f if fw is None else stack(fw, f)
    if fw is None:
        raise ValueError("empty annulus word has no front")
    return fw


# ---------------------------------------------------------------------------
# skein elements


@dataclass(frozen=True)
class SkeinSurfaceTag:
    kind: str  # 'plane' | 'disk' | 'annulus'
    marked: int = 0


class SkeinElem:
    """Finite combination of canonical basis words over the coefficient ring.

    Keys: plane: the empty word () only; disk: tuple of letters (i, j) in
    canonical order; annulus: tuple of letters (k, m) in canonical order.
    """

    def __init__(self, tag, terms=None):
        self.tag = tag
        self.terms = {}
        for k, v in (terms or {}).items():
            if not v.is_zero():
                self.terms[k] = v

    @staticmethod
    def zero(tag):
        return SkeinElem(tag, {})

    @staticmethod
    def word(tag, letters, coeff=None):
        coeff = coeff if coeff is not None else RingElem.one()
        if tag.kind == "disk":
            assert disk_word_is_sorted(letters), f"unsorted word {letters}"
        elif tag.kind == "annulus":
            assert annulus_word_is_sorted(letters), f"unsorted word {letters}"
        else:
            assert letters == ()
        return SkeinElem(tag, {tuple(letters): coeff})

    def __add__(self, other):
        assert self.tag == other.tag
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, RingElem.zero()) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return SkeinElem(self.tag, out)

    def scale(self, c: RingElem):
        return SkeinElem(self.tag, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, SkeinElem) and self.tag == other.tag \
            and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({v})*{list(k)}" for k, v in
                          sorted(self.terms.items(), key=str))

    def specialize(self, q0):
        return {k: v.specialize(q0) for k, v in self.terms.items()}

    def to_json(self):
        return {"terms": [{"word": [list(l) for l in k], "coeff": v.to_json()}
                          for k, v in sorted(self.terms.items(), key=str)]}
