"""Graded Legendrian fronts and their resolved Lagrangian diagrams.

A front word lists elementary slices on horizontal strands (positions
bottom=0): left cusp ``L pos deg``, right cusp ``R pos``, crossing ``X pos``.
Resolution produces crossings with quarter-turn structure, wall attachments at
disk marked points, the complementary regions (faces), and an exact positive
height/area assignment certifying that the diagram lifts to a Legendrian link.

Conventions (pinned by the test suite):

- Strand labels are Maslov potentials; at cusps the upper strand is labeled n,
  the lower n+1.  A right cusp resolves to a crossing plus a cup ("kink"),
  except for the first right cusp of every wall-to-wall component of a disk
  diagram, which resolves to a plain cup so that boundary chords carry no
  spurious self-crossing; such plain cups require equal labels.
- At a crossing of the up-strand (label m) and down-strand (label n):
  i(down, up) = m - n + 1 and i(up, down) = n - m.  The generator degree i_x
  puts the z-over branch first.  Resolved front crossings have the strand
  entering from the upper left (the down-strand) z-over; stacked diagrams
  declare the upper component z-over explicitly.
- Disk diagrams list initial strands in wall order: marked points p_n..p_0
  bottom to top, and within one marked point in angular order (bottom to top).
  The Legendrian z-order of ends at one marked point is separate data
  (``zorder`` ranks, default = position order).
- Faces are the complementary regions of the slice picture; each region's
  area is the sum of corner contributions (z-jumps); all interior areas and
  crossing heights must admit a strictly positive exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lp import strict_interior_point


class FrontError(ValueError):
    pass


class InfeasibleDiagram(ValueError):
    pass


@dataclass(frozen=True)
class Surface:
    kind: str  # 'plane' | 'annulus' | 'disk'
    marked: int = 0  # number of boundary marked points (disk only)

    def __post_init__(self):
        if self.kind not in ("plane", "annulus", "disk"):
            raise FrontError(f"unknown surface kind {self.kind!r}")
        if self.kind == "disk" and self.marked < 1:
            raise FrontError("disk needs at least one marked point")


PLANE = Surface("plane")
ANNULUS = Surface("annulus")


def disk(n_plus_1: int) -> Surface:
    return Surface("disk", n_plus_1)


# ---------------------------------------------------------------------------
# front words


def _plain_cup_plan(surface, init_count, events):
    """Indices of 'R' events resolving to plain cups: the first right cusp of
    each open component (disk only)."""
    if surface.kind != "disk":
        return set()
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    strands = list(range(init_count))
    wall_ids = set(strands)
    nxt = init_count
    rcusps = []
    for idx, ev in enumerate(events):
        if ev[0] == "L":
            a, b = nxt, nxt + 1
            nxt += 2
            union(a, b)
            strands.insert(ev[1], a)
            strands.insert(ev[1] + 1, b)
        elif ev[0] == "R":
            union(strands[ev[1]], strands[ev[1] + 1])
            rcusps.append((idx, strands[ev[1]]))
            del strands[ev[1]:ev[1] + 2]
        else:
            p = ev[1]
            strands[p], strands[p + 1] = strands[p + 1], strands[p]
    open_roots = {find(w) for w in wall_ids}
    out, seen = set(), set()
    for idx, a in rcusps:
        r = find(a)
        if r in open_roots and r not in seen:
            seen.add(r)
            out.add(idx)
    return out


def _end_partners(init_count, events):
    """For disk fronts: partner initial strand of each initial strand
    (the other wall end of its component), or None for closed parts."""
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    strands = list(range(init_count))
    nxt = init_count
    for ev in events:
        if ev[0] == "L":
            a, b = nxt, nxt + 1
            nxt += 2
            union(a, b)
            strands.insert(ev[1], a)
            strands.insert(ev[1] + 1, b)
        elif ev[0] == "R":
            union(strands[ev[1]], strands[ev[1] + 1])
            del strands[ev[1]:ev[1] + 2]
        else:
            p = ev[1]
            strands[p], strands[p + 1] = strands[p + 1], strands[p]
    groups = {}
    for i in range(init_count):
        groups.setdefault(find(i), []).append(i)
    partner = {}
    for g in groups.values():
        if len(g) == 2:
            partner[g[0]], partner[g[1]] = g[1], g[0]
        elif len(g) == 1:
            partner[g[0]] = None
        else:
            raise FrontError("component with more than two wall ends")
    return partner


@dataclass(frozen=True)
class FrontWord:
    """Front presentation: initial strands with degrees (bottom to top),
    events, and for disks the marked-point label and z-rank per initial
    strand.  Events:

        ('L', pos, deg)          left cusp (inserts deg+1 at pos, deg above)
        ('R', pos)               right cusp (joins pos, pos+1)
        ('X', pos)               crossing
        ('X', pos, 'up'|'down')  crossing with explicit z-over strand
    """

    surface: Surface
    init_degrees: tuple = ()
    events: tuple = ()
    left_labels: tuple = ()
    zorder: tuple = ()  # z-rank per initial strand; default: position order

    def __post_init__(self):
        self.validate()

    # -- validation --------------------------------------------------------

    def validate(self):
        s = self.surface
        degs = list(self.init_degrees)
        if s.kind == "plane" and degs:
            raise FrontError("plane fronts start with no strands")
        if s.kind == "disk":
            if len(self.left_labels) != len(degs):
                raise FrontError("disk front needs one marked label per strand")
            for lab in self.left_labels:
                if not 0 <= lab < s.marked:
                    raise FrontError("marked point label out of range")
            if self.zorder and sorted(self.zorder) != list(range(len(degs))):
                raise FrontError("zorder must be a permutation of strand slots")
        elif self.left_labels or self.zorder:
            raise FrontError("labels/zorder are for disk fronts only")
        plain = _plain_cup_plan(s, len(degs), self.events)
        for idx, ev in enumerate(self.events):
            kind, pos = ev[0], ev[1]
            if kind == "L":
                if not 0 <= pos <= len(degs):
                    raise FrontError(f"left cusp position {pos} out of range")
                d = ev[2]
                degs.insert(pos, d + 1)
                degs.insert(pos + 1, d)
            elif kind == "R":
                if not 0 <= pos < len(degs) - 1:
                    raise FrontError(f"right cusp position {pos} out of range")
                if idx not in plain and degs[pos] != degs[pos + 1] + 1:
                    raise FrontError(
                        f"cusp grading mismatch at event {idx}: "
                        f"{degs[pos]} vs {degs[pos + 1]}")
                del degs[pos:pos + 2]
            elif kind == "X":
                if not 0 <= pos < len(degs) - 1:
                    raise FrontError(f"crossing position {pos} out of range")
                if len(ev) > 2 and ev[2] not in ("up", "down"):
                    raise FrontError(f"bad z-over tag {ev[2]!r}")
                degs[pos], degs[pos + 1] = degs[pos + 1], degs[pos]
            else:
                raise FrontError(f"unknown event {ev!r}")
        if s.kind == "annulus":
            if tuple(degs) != tuple(self.init_degrees):
                raise FrontError("annulus front does not close up")
        elif degs:
            raise FrontError("front must end with no strands")
        if s.kind == "disk":
            self._validate_wall_order()

    def zranks(self):
        return tuple(self.zorder) if self.zorder else tuple(range(len(self.init_degrees)))

    def _validate_wall_order(self):
        labs = self.left_labels
        n = len(labs)
        if list(labs) != sorted(labs, reverse=True):
            raise FrontError("disk ends must be listed wall-sorted "
                             "(labels non-increasing bottom to top)")
        partner = _end_partners(n, self.events)
        zr = self.zranks()
        nn = self.surface.marked - 1
        # within one marked point, positions bottom to top must be angular
        # bottom to top: sort key descending <=> angular top to bottom
        for v in set(labs):
            slots = [i for i in range(n) if labs[i] == v]
            keys = []
            for i in slots:
                p = partner[i]
                tgt = labs[p] if p is not None else v
                tie = zr[i] if v <= tgt else -zr[i]
                keys.append(_angular_key(v, tgt, nn, tie))
            if keys != sorted(keys, reverse=True):
                raise FrontError(
                    f"ends at marked point {v} not in angular order "
                    f"(boundary-circle fan, top to bottom): {keys}")

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        s = self.surface
        if s.kind == "disk":
            lines.append(f"surface disk {s.marked}")
        else:
            lines.append(f"surface {s.kind}")
        if self.init_degrees:
            lines.append("strands " + " ".join(str(d) for d in self.init_degrees))
        if self.zorder:
            lines.append("zorder " + " ".join(str(r) for r in self.zorder))
        for ev in self.events:
            if ev[0] == "L":
                lines.append(f"L {ev[1]} deg {ev[2]}")
            elif ev[0] == "R":
                lines.append(f"R {ev[1]}")
            elif len(ev) > 2:
                lines.append(f"X {ev[1]} over {ev[2]}")
            else:
                lines.append(f"X {ev[1]}")
        if s.kind == "disk":
            lines.append("ends left " + " ".join(str(l) for l in self.left_labels) + " right")
        else:
            lines.append("close")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "FrontWord":
        surface = None
        init = ()
        zorder = ()
        events = []
        labels = ()
        saw_close = False
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                if tok[0] == "surface":
                    surface = disk(int(tok[2])) if tok[1] == "disk" else Surface(tok[1])
                elif tok[0] == "strands":
                    init = tuple(int(t) for t in tok[1:])
                elif tok[0] == "zorder":
                    zorder = tuple(int(t) for t in tok[1:])
                elif tok[0] == "L":
                    assert tok[2] == "deg"
                    events.append(("L", int(tok[1]), int(tok[3])))
                elif tok[0] == "R":
                    events.append(("R", int(tok[1])))
                elif tok[0] == "X":
                    if len(tok) > 2:
                        assert tok[2] == "over"
                        events.append(("X", int(tok[1]), tok[3]))
                    else:
                        events.append(("X", int(tok[1])))
                elif tok[0] == "close":
                    saw_close = True
                elif tok[0] == "ends":
                    i = tok.index("left")
                    j = tok.index("right")
                    labels = tuple(int(t) for t in tok[i + 1:j])
                    if tok[j + 1:]:
                        raise FrontError("right-boundary endpoints not supported")
                    saw_close = True
                else:
                    raise FrontError(f"unknown directive {tok[0]!r}")
            except (IndexError, ValueError, AssertionError) as e:
                raise FrontError(f"line {ln}: cannot parse {raw!r} ({e})") from e
        if surface is None:
            raise FrontError("missing surface declaration")
        if not saw_close:
            raise FrontError("missing closing declaration")
        return FrontWord(surface, init, tuple(events), labels, zorder)

    # -- combinators ---------------------------------------------------------

    def shift(self, k: int) -> "FrontWord":
        """Object shift [k]: subtract k from every grading label."""
        return FrontWord(self.surface,
                         tuple(d - k for d in self.init_degrees),
                         tuple(e if e[0] != "L" else ("L", e[1], e[2] - k)
                               for e in self.events),
                         self.left_labels, self.zorder)

    def resolve(self, feasible=True) -> "LagDiagram":
        return LagDiagram.from_front(self, feasible=feasible)


def stack(a: FrontWord, b: FrontWord) -> FrontWord:
    """Stack b on top of a in the Legendrian direction."""
    if a.surface != b.surface:
        raise FrontError("stacking requires equal surfaces")
    s = a.surface
    if s.kind == "plane":
        ka = len(a.init_degrees)
        assert ka == 0
        return FrontWord(s, (), a.events + b.events)
    if s.kind == "disk":
        return _stack_disk(a, b)
    # annulus
    ka = len(a.init_degrees)
    init = a.init_degrees + b.init_degrees
    events = list(a.events)
    for ev in b.events:
        if ev[0] == "L":
            events.append(("L", ev[1] + ka, ev[2]))
        elif ev[0] == "R":
            events.append(("R", ev[1] + ka))
        else:
            events.append(("X", ev[1] + ka) + tuple(ev[2:]))
    fingers = _winding_positions(b)
    if len(fingers) > 1 and ka:
        raise FrontError("stack supports one winding component on top; "
                         "stack word factors one at a time")
    for pos0 in fingers:
        pos = pos0 + ka
        if ka == 0:
            continue
        for i in range(pos - 1, -1, -1):
            events.append(("X", i, "down"))
        for i in range(0, pos):
            events.append(("X", i, "up"))
    return FrontWord(ANNULUS, init, tuple(events), ())


def stack_word(factors):
    out = None
    for f in factors:
        out = f if out is None else stack(out, f)
    return out


def _winding_positions(b: FrontWord):
    lag = LagDiagram.from_front(b, feasible=False)
    out = []
    for comp in lag.closed_components:
        if lag.winding.get(comp, 0) != 0:
            out.append(lag.comp_low_final_pos[comp])
    return sorted(out)


def _disk_parts(f: FrontWord):
    """Split a disk front into chords [(va, vb, mu_a, mu_b, zra, zrb)] and
    floated closed sub-fronts (plane-style event lists)."""
    labs = f.left_labels
    n = len(labs)
    partner = _end_partners(n, f.events)
    zr = f.zranks()
    chords = []
    seen = set()
    for i in range(n):
        if i in seen or partner[i] is None:
            continue
        j = partner[i]
        seen.update((i, j))
        ji = 1 if labs[i] < labs[j] else 0
        jj = 1 if labs[j] < labs[i] else 0
        chords.append((labs[i], labs[j], f.init_degrees[i] - ji,
                       f.init_degrees[j] - jj, zr[i], zr[j]))
    closed_events = _closed_part(f)
    return chords, closed_events


def _closed_part(f: FrontWord):
    """Events of closed components of a disk front, as a plane front word,
    or None when there are none.  Only the 'floated suffix' layout is
    supported: closed parts must not interleave with wall strands."""
    # find events whose strands never connect to the wall
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        parent[find(a)] = find(b)

    strands = list(range(len(f.init_degrees)))
    wall = set(strands)
    nxt = len(strands)
    ev_curve = []
    for ev in f.events:
        if ev[0] == "L":
            a, b = nxt, nxt + 1
            nxt += 2
            union(a, b)
            strands.insert(ev[1], a)
            strands.insert(ev[1] + 1, b)
            ev_curve.append((ev, (a,)))
        elif ev[0] == "R":
            union(strands[ev[1]], strands[ev[1] + 1])
            ev_curve.append((ev, (strands[ev[1]],)))
            del strands[ev[1]:ev[1] + 2]
        else:
            ev_curve.append((ev, (strands[ev[1]], strands[ev[1] + 1])))
            p = ev[1]
            strands[p], strands[p + 1] = strands[p + 1], strands[p]
    wall_roots = {find(w) for w in wall}
    closed = []
    for ev, ids in ev_curve:
        roots = {find(i) for i in ids}
        if roots & wall_roots:
            if len(roots) > 1 and not roots <= wall_roots:
                raise FrontError("closed component interacts with wall arcs; "
                                 "unsupported disk layout")
            continue
        closed.append(ev)
    return tuple(closed)


def _stack_disk(a: FrontWord, b: FrontWord) -> FrontWord:
    ach, acl = _disk_parts(a)
    bch, bcl = _disk_parts(b)
    if acl and bch:
        raise FrontError("stacking chords above closed parts is unsupported")
    merged = []
    for blk, ch in ((0, ach), (1, bch)):
        for (va, vb, mua, mub, za, zb) in ch:
            merged.append((va, vb, mua, mub, (blk, za), (blk, zb)))
    fw = disk_front(a.surface.marked, merged)
    closed = acl + bcl
    if closed:
        fw = FrontWord(fw.surface, fw.init_degrees, fw.events + closed,
                       fw.left_labels, fw.zorder)
    return fw


def disk_front(n_plus_1, chords, closed_events=()) -> FrontWord:
    """Build a canonical disk front from chords.

    ``chords``: list of (va, vb, mu_a, mu_b, zk_a, zk_b) where zk are sortable
    z-keys (higher = greater Legendrian z at the wall); or (va, vb, mu_a, mu_b)
    with default keys by list order.
    """
    ends = []
    for idx, ch in enumerate(chords):
        if len(ch) == 4:
            va, vb, mua, mub = ch
            zka, zkb = (idx, 1), (idx, 0)
        else:
            va, vb, mua, mub, zka, zkb = ch
        ja = 1 if va < vb else 0
        jb = 1 if vb < va else 0
        ends.append({"chord": idx, "vertex": va, "mu": mua + ja, "zk": zka,
                     "other": vb})
        ends.append({"chord": idx, "vertex": vb, "mu": mub + jb, "zk": zkb,
                     "other": va})
    n = n_plus_1 - 1
    order = sorted(range(len(ends)),
                   key=lambda k: _end_sort_key(ends[k], n), reverse=True)
    # bottom-to-top: key descending reversed -> ascending? We need labels
    # non-increasing bottom to top and angular bottom-to-top within vertex:
    # sort by (vertex, angular-key) with vertex descending.
    zrank_of = {e: r for r, e in
                enumerate(sorted(range(len(ends)), key=lambda k: ends[k]["zk"]))}
    init_degrees = tuple(ends[k]["mu"] for k in order)
    labels = tuple(ends[k]["vertex"] for k in order)
    zorder = tuple(zrank_of[k] for k in order)
    # events: close the matching with crossings (z-over by z-keys)
    slots = [ends[k]["chord"] for k in order]
    zks = [ends[k]["zk"] for k in order]
    events = []
    while slots:
        cupped = False
        for i in range(len(slots) - 1):
            if slots[i] == slots[i + 1]:
                events.append(("R", i))
                del slots[i:i + 2]
                del zks[i:i + 2]
                cupped = True
                break
        if cupped:
            continue
        # bring the partner of the bottom strand down next to it; the strand
        # at slot j descends (the down-strand of the crossing)
        j = slots.index(slots[0], 1)
        over = "down" if zks[j] > zks[j - 1] else "up"
        events.append(("X", j - 1, over))
        slots[j - 1], slots[j] = slots[j], slots[j - 1]
        zks[j - 1], zks[j] = zks[j], zks[j - 1]
    return FrontWord(disk(n_plus_1), init_degrees, tuple(events) + tuple(closed_events),
                     labels, zorder)


def _angular_key(v, tgt, n, tie):
    """Fan position at vertex v (smaller = angular higher): chords point at
    their targets in the circular boundary order v-1, ..., 0, infinity,
    n, ..., v+1 from the up-wall side to the down-wall side.  Loops sit at
    the bottom of the fan; the tie orders parallels and loop pairs."""
    if tgt == v:
        return (n + 3, tie)
    return ((v - tgt) % (n + 2), tie)


def _end_sort_key(e, n):
    v, tgt = e["vertex"], e["other"]
    tie = e["zk"] if v <= tgt else tuple(-x for x in e["zk"])
    return (v, _angular_key(v, tgt, n, tie))


# ---------------------------------------------------------------------------
# the resolved diagram


@dataclass
class Crossing:
    cid: int
    mu_up: int
    mu_dn: int
    over: str   # 'up' | 'down'
    kind: str   # 'front' | 'kink'
    gap: int    # gap index before the crossing column
    pos: int    # strand position of the crossing

    def i_x(self) -> int:
        if self.over == "down":
            return self.mu_up - self.mu_dn + 1
        return self.mu_dn - self.mu_up


@dataclass
class WallEnd:
    eid: int
    vertex: int
    mu: int       # strand label (with the upper-vertex jump)
    pos: int      # initial strand slot (angular position, bottom=0 globally)
    zrank: int
    arc: int = -1
    comp: int = -1
    target: int = -1   # partner end id

    def wall_mu(self, lag):
        """Label at the wall: the strand toward the upper vertex rotates an
        extra half turn between the wall and the interior."""
        tgt = lag.wall_ends[self.target].vertex if self.target >= 0 else self.vertex
        return self.mu - (1 if self.vertex < tgt else 0)


PORT_CCW = ("EU", "WU", "WL", "EL")
STRAND_OF = {"EU": "up", "WL": "up", "WU": "down", "EL": "down"}
PARTNER = {"EU": "WL", "WL": "EU", "WU": "EL", "EL": "WU"}


def cw_next_port(port: str) -> str:
    return PORT_CCW[(PORT_CCW.index(port) - 1) % 4]


class LagDiagram:
    def __init__(self, surface):
        self.surface = surface

    # ------------------------------------------------------------------

    @staticmethod
    def from_front(front: FrontWord, feasible=True) -> "LagDiagram":
        self = LagDiagram(front.surface)
        self.front = front
        events = self._expand_events(front)
        self._scan(front, events)
        self._build_arcs(front)
        self._components_and_orientations()
        self._regions()
        if feasible:
            self.solve_feasibility()
        return self

    def _expand_events(self, front):
        plain = _plain_cup_plan(front.surface, len(front.init_degrees), front.events)
        out = []
        for idx, ev in enumerate(front.events):
            if ev[0] == "L":
                out.append(("CAP", ev[1], ev[2]))
            elif ev[0] == "R":
                if idx not in plain:
                    out.append(("X", ev[1], "down", "kink"))
                out.append(("CUP", ev[1]))
            else:
                over = ev[2] if len(ev) > 2 else "down"
                out.append(("X", ev[1], over, "front"))
        return out

    def _scan(self, front, events):
        self.pieces = []   # {'left':link,'right':link,'life':[(gap,pos)...]}
        self.crossings = []
        self.wall_ends = []

        def new_piece():
            self.pieces.append({"left": None, "right": None, "life": []})
            return len(self.pieces) - 1

        strands = []
        if front.surface.kind == "disk":
            zr = front.zranks()
            for slot, (lab, d) in enumerate(zip(front.left_labels, front.init_degrees)):
                eid = len(self.wall_ends)
                self.wall_ends.append(WallEnd(eid, lab, d, slot, zr[slot]))
                pid = new_piece()
                self.pieces[pid]["left"] = ("wall", eid)
                strands.append({"piece": pid, "mu": d})
        else:
            for pos, d in enumerate(front.init_degrees):
                pid = new_piece()
                self.pieces[pid]["left"] = ("cut", pos)
                strands.append({"piece": pid, "mu": d})
        self._first_pieces = [st["piece"] for st in strands]

        def record(gap):
            for pos, st in enumerate(strands):
                self.pieces[st["piece"]]["life"].append((gap, pos))

        record(0)
        for gap, ev in enumerate(events):
            kind, pos = ev[0], ev[1]
            if kind == "X":
                cid = len(self.crossings)
                lo, hi = strands[pos], strands[pos + 1]
                self.crossings.append(
                    Crossing(cid, lo["mu"], hi["mu"], ev[2], ev[3], gap, pos))
                self.pieces[lo["piece"]]["right"] = ("X", cid, "WL")
                self.pieces[hi["piece"]]["right"] = ("X", cid, "WU")
                p_el, p_eu = new_piece(), new_piece()
                self.pieces[p_el]["left"] = ("X", cid, "EL")
                self.pieces[p_eu]["left"] = ("X", cid, "EU")
                strands[pos] = {"piece": p_el, "mu": hi["mu"]}
                strands[pos + 1] = {"piece": p_eu, "mu": lo["mu"]}
            elif kind == "CAP":
                d = ev[2]
                p_lo, p_hi = new_piece(), new_piece()
                self.pieces[p_lo]["left"] = ("cap", p_hi)
                self.pieces[p_hi]["left"] = ("cap", p_lo)
                strands.insert(pos, {"piece": p_lo, "mu": d + 1})
                strands.insert(pos + 1, {"piece": p_hi, "mu": d})
            elif kind == "CUP":
                lo, hi = strands[pos], strands[pos + 1]
                self.pieces[lo["piece"]]["right"] = ("cup", hi["piece"])
                self.pieces[hi["piece"]]["right"] = ("cup", lo["piece"])
                del strands[pos:pos + 2]
            record(gap + 1)
        self.n_gaps = len(events) + 1
        self._gap_counts = [0] * self.n_gaps
        for p in self.pieces:
            for g, pos in p["life"]:
                self._gap_counts[g] = max(self._gap_counts[g], pos + 1)
        if front.surface.kind == "annulus":
            for pos, st in enumerate(strands):
                self.pieces[st["piece"]]["right"] = ("cutend", pos)
            self._final_pieces = [st["piece"] for st in strands]
        else:
            assert not strands, "front must close"
            self._final_pieces = []
        self._events = events

    # -- arcs / components -------------------------------------------------

    def _build_arcs(self, front):
        def step(piece, d):
            link = self.pieces[piece]["right" if d == 1 else "left"]
            k = link[0]
            if k == "cap":
                return (link[1], 1), None
            if k == "cup":
                return (link[1], -1), None
            if k == "cut":
                return (self._final_pieces[link[1]], -1), None
            if k == "cutend":
                return (self._first_pieces[link[1]], 1), None
            return None, link

        seen = set()
        self.arcs = []
        piece_dart_arc = {}
        for p0 in range(len(self.pieces)):
            for d0 in (1, -1):
                if (p0, d0) in seen:
                    continue
                cur = (p0, d0)
                trail = {cur}
                freeloop = False
                while True:
                    back, stop = step(cur[0], -cur[1])
                    if stop is not None:
                        break
                    nxt = (back[0], -back[1])
                    if nxt in trail:
                        freeloop = True
                        break
                    cur = nxt
                    trail.add(cur)
                tailport = None
                if not freeloop:
                    tailport = self._portkey(step(cur[0], -cur[1])[1])
                run = []
                node = cur
                headport = None
                while True:
                    run.append(node)
                    seen.add(node)
                    seen.add((node[0], -node[1]))
                    nxt, stop = step(node[0], node[1])
                    if stop is not None:
                        headport = self._portkey(stop)
                        break
                    if freeloop and nxt == cur:
                        break
                    node = nxt
                aid = len(self.arcs)
                self.arcs.append({"id": aid, "tail": tailport, "head": headport,
                                  "run": tuple(run), "comp": -1, "orient": 1,
                                  "marked": False, "free": freeloop})
                for nd in run:
                    piece_dart_arc[nd] = (aid, 1)
                    piece_dart_arc[(nd[0], -nd[1])] = (aid, -1)
        self._piece_dart_arc = piece_dart_arc
        self.joints = []
        for a in self.arcs:
            if a["free"]:
                jid = len(self.joints)
                self.joints.append(a["id"])
                a["tail"] = ("J", jid, "E")
                a["head"] = ("J", jid, "W")
        self._port_end = {}
        for a in self.arcs:
            for endn in ("tail", "head"):
                p = a[endn]
                if p is not None:
                    self._port_end[p] = (a["id"], endn)
        for e in self.wall_ends:
            e.arc = self._port_end[("wall", e.eid)][0]

    def _portkey(self, link):
        if link[0] == "X":
            return ("X", link[1], link[2])
        if link[0] == "wall":
            return ("wall", link[1])
        raise FrontError(f"unexpected link {link!r}")

    def arc_end_at(self, port):
        return self._port_end[port]

    def _components_and_orientations(self):
        n = len(self.arcs)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            parent[find(x)] = find(y)

        cont = {}
        for c in self.crossings:
            for pa, pb in ((("X", c.cid, "WL"), ("X", c.cid, "EU")),
                           (("X", c.cid, "WU"), ("X", c.cid, "EL"))):
                cont[pa] = pb
                cont[pb] = pa
                union(self._port_end[pa][0], self._port_end[pb][0])
        self._cont = cont
        comp_map = {}
        for a in self.arcs:
            r = find(a["id"])
            comp_map.setdefault(r, len(comp_map))
            a["comp"] = comp_map[r]
        self.components = sorted(set(a["comp"] for a in self.arcs))
        by_comp = {}
        for a in self.arcs:
            by_comp.setdefault(a["comp"], []).append(a["id"])
        for comp, aids in by_comp.items():
            root = min(aids)
            self.arcs[root]["orient"] = 1
            stack_ = [root]
            seen = {root}
            while stack_:
                aid = stack_.pop()
                a = self.arcs[aid]
                for endn, port in (("head", a["head"]), ("tail", a["tail"])):
                    if port is None or port[0] != "X":
                        continue
                    q = cont[port]
                    b_id, b_end = self._port_end[q]
                    if b_id in seen:
                        continue
                    seen.add(b_id)
                    a_dir_into = a["orient"] if endn == "head" else -a["orient"]
                    b_dir_out = 1 if b_end == "tail" else -1
                    self.arcs[b_id]["orient"] = a_dir_into * b_dir_out
                    stack_.append(b_id)
        open_comps = set()
        for e in self.wall_ends:
            e.comp = self.arcs[e.arc]["comp"]
            open_comps.add(e.comp)
        self.closed_components = [c for c in self.components if c not in open_comps]
        for comp in self.closed_components:
            self.arcs[self._marked_arc(by_comp[comp])]["marked"] = True
        self.winding = {c: 0 for c in self.components}
        self.comp_low_final_pos = {}
        self._post_orientation()

    def _marked_arc(self, aids):
        """Marked dart: prefer the loop arc of the last resolved right cusp
        (the local system is trivialized away from a point on a teardrop,
        matching the usual normalization); otherwise the lowest arc."""
        loops = []
        for aid in aids:
            a = self.arcs[aid]
            t, h = a["tail"], a["head"]
            if (t is not None and h is not None and t[0] == "X" and h[0] == "X"
                    and t[1] == h[1] and self.crossings[t[1]].kind == "kink"):
                loops.append((t[1], aid))
        if loops:
            return max(loops)[1]
        return min(aids)

    def _post_orientation(self):
        if self.surface.kind == "annulus":
            for pos, pid in enumerate(self._final_pieces):
                aid, adir = self._piece_dart_arc[(pid, 1)]
                a = self.arcs[aid]
                comp = a["comp"]
                self.winding[comp] += a["orient"] * adir
                self.comp_low_final_pos.setdefault(comp, pos)
            self.winding = {c: abs(w) for c, w in self.winding.items()}
        # partner ends (for wall labels)
        by_comp_ends = {}
        for e in self.wall_ends:
            by_comp_ends.setdefault(e.comp, []).append(e.eid)
        for comp, eids in by_comp_ends.items():
            if len(eids) == 2:
                a, b = eids
                self.wall_ends[a].target = b
                self.wall_ends[b].target = a
            elif len(eids) == 1:
                self.wall_ends[eids[0]].target = eids[0]
        # wall vertices: ends grouped by marked point, angular top-to-bottom
        self.wall_vertices = {}
        for e in self.wall_ends:
            self.wall_vertices.setdefault(e.vertex, []).append(e.eid)
        for v, eids in self.wall_vertices.items():
            eids.sort(key=lambda eid: -self.wall_ends[eid].pos)  # top first

    # -- regions (faces) -----------------------------------------------------

    def _regions(self):
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            parent[find(a)] = find(b)

        counts = self._gap_counts
        for g in range(self.n_gaps):
            for j in range(counts[g] + 1):
                find((g, j))
        for g, ev in enumerate(self._events):
            kind, pos = ev[0], ev[1]
            k = counts[g]
            if kind == "X":
                for j in range(k + 1):
                    if j != pos + 1:
                        union((g, j), (g + 1, j))
            elif kind == "CAP":
                for j in range(k + 1):
                    union((g, j), (g + 1, j if j <= pos else j + 2))
            else:  # CUP
                for j in range(k + 1):
                    if j <= pos:
                        union((g, j), (g + 1, j))
                    elif j >= pos + 2:
                        union((g, j), (g + 1, j - 2))
        if self.surface.kind == "annulus":
            last = self.n_gaps - 1
            for j in range(counts[0] + 1):
                union((0, j), (last, j))
        reps = {}
        for g in range(self.n_gaps):
            for j in range(counts[g] + 1):
                r = find((g, j))
                reps.setdefault(r, len(reps))
        self._region_find = find
        self.n_faces = len(reps)
        self._face_idx = {r: i for r, i in reps.items()}

        # forbidden faces
        self.forbidden_faces = set()
        if self.surface.kind == "plane":
            if counts:
                self.forbidden_faces.add(self.face_at(0, 0))
        elif self.surface.kind == "annulus":
            self.forbidden_faces.add(self.face_at(0, 0))
            self.forbidden_faces.add(self.face_at(0, counts[0]))
        else:
            k0 = counts[0]
            self.forbidden_faces.add(self.face_at(0, 0))
            self.forbidden_faces.add(self.face_at(0, k0))
            labs = [self.wall_ends[self._end_at_slot(s)].vertex for s in range(k0)]
            for j in range(1, k0):
                if labs[j - 1] != labs[j]:
                    self.forbidden_faces.add(self.face_at(0, j))

        # corners per face
        self.face_corners = {f: [] for f in range(self.n_faces)}
        for c in self.crossings:
            g, p = c.gap, c.pos
            self.face_corners[self.face_at(g, p + 1)].append(("W", c.cid))
            self.face_corners[self.face_at(g + 1, p + 1)].append(("E", c.cid))
            self.face_corners[self.face_at(g, p + 2)].append(("N", c.cid))
            self.face_corners[self.face_at(g, p)].append(("S", c.cid))
        if self.surface.kind == "disk":
            for v, eids in self.wall_vertices.items():
                # angular-adjacent pairs: positions descending top-to-bottom
                for hi, lo in zip(eids, eids[1:]):
                    e_hi, e_lo = self.wall_ends[hi], self.wall_ends[lo]
                    assert e_hi.pos == e_lo.pos + 1, "vertex ends not contiguous"
                    self.face_corners[self.face_at(0, e_hi.pos)].append(
                        ("WEDGE", hi, lo))

    def _end_at_slot(self, slot):
        for e in self.wall_ends:
            if e.pos == slot:
                return e.eid
        raise FrontError("missing wall end")

    def face_at(self, gap, idx):
        return self._face_idx[self._region_find((gap, idx))]

    def seg_faces(self, gap, pos):
        """(below, above) faces across the strand segment at (gap, pos)."""
        return self.face_at(gap, pos), self.face_at(gap, pos + 1)

    def quadrant_face(self, cid, quad):
        c = self.crossings[cid]
        g, p = c.gap, c.pos
        return {"W": self.face_at(g, p + 1), "E": self.face_at(g + 1, p + 1),
                "N": self.face_at(g, p + 2), "S": self.face_at(g, p)}[quad]

    def wedge_faces(self, e_hi, e_lo):
        """Faces of the wedges between two ends of one vertex (hi above lo)."""
        a, b = self.wall_ends[e_hi], self.wall_ends[e_lo]
        assert a.vertex == b.vertex and a.pos > b.pos
        return [self.face_at(0, k + 1) for k in range(b.pos, a.pos)]

    # -- feasibility ---------------------------------------------------------

    def _corner_term(self, corner):
        """(zvar_plus, zvar_minus) for a corner's area contribution."""
        if corner[0] in ("W", "E"):
            cid = corner[1]
            return ("z", cid, "dn"), ("z", cid, "up")
        if corner[0] in ("N", "S"):
            cid = corner[1]
            return ("z", cid, "up"), ("z", cid, "dn")
        _, hi, lo = corner
        return ("ze", lo), ("ze", hi)

    def solve_feasibility(self):
        vars_ = []
        index = {}

        def vid(v):
            if v not in index:
                index[v] = len(vars_)
                vars_.append(v)
            return index[v]

        for c in self.crossings:
            vid(("z", c.cid, "up"))
            vid(("z", c.cid, "dn"))
        for e in self.wall_ends:
            vid(("ze", e.eid))
        rows = []
        tags = []
        for c in self.crossings:
            row = [Fraction(0)] * len(vars_)
            over, under = (("up", "dn") if c.over == "up" else ("dn", "up"))
            row[index[("z", c.cid, over)]] += 1
            row[index[("z", c.cid, under)]] -= 1
            rows.append(row)
            tags.append(("h", c.cid))
        for v, eids in getattr(self, "wall_vertices", {}).items():
            by_rank = sorted(eids, key=lambda eid: self.wall_ends[eid].zrank)
            for lo, hi in zip(by_rank, by_rank[1:]):
                row = [Fraction(0)] * len(vars_)
                row[index[("ze", hi)]] += 1
                row[index[("ze", lo)]] -= 1
                rows.append(row)
                tags.append(("zorder", v))
        for f in range(self.n_faces):
            if f in self.forbidden_faces:
                continue
            corners = self.face_corners[f]
            if not corners:
                raise InfeasibleDiagram(f"interior face {f} has no corners")
            row = [Fraction(0)] * len(vars_)
            for corner in corners:
                plus, minus = self._corner_term(corner)
                row[index[plus]] += 1
                row[index[minus]] -= 1
            rows.append(row)
            tags.append(("area", f))
        if not vars_:
            self.z = {}
            self.heights = {}
            self.areas = {}
            return
        sol = strict_interior_point(rows, len(vars_))
        if sol is None:
            raise InfeasibleDiagram("no positive height/area assignment exists")
        self.z = {v: sol[index[v]] for v in vars_}
        self.heights = {}
        for c in self.crossings:
            over, under = (("up", "dn") if c.over == "up" else ("dn", "up"))
            self.heights[c.cid] = (self.z[("z", c.cid, over)]
                                   - self.z[("z", c.cid, under)])
        self.areas = {}
        for f in range(self.n_faces):
            if f in self.forbidden_faces:
                continue
            area = Fraction(0)
            for corner in self.face_corners[f]:
                plus, minus = self._corner_term(corner)
                area += self.z[plus] - self.z[minus]
            self.areas[f] = area

    # -- generators ----------------------------------------------------------

    def wall_pairs(self):
        """All ordered wall pairs (e angular-above e') at one vertex:
        (eid_hi, eid_lo, present, degree).  The generator maps the hi-end
        component to the lo-end component and exists in the positive part
        iff z(hi) > z(lo)."""
        out = []
        for v, eids in getattr(self, "wall_vertices", {}).items():
            for i in range(len(eids)):
                for j in range(i + 1, len(eids)):
                    hi, lo = self.wall_ends[eids[i]], self.wall_ends[eids[j]]
                    present = hi.zrank > lo.zrank
                    deg = lo.wall_mu(self) - hi.wall_mu(self)
                    out.append((hi.eid, lo.eid, present, deg))
        return out

    def generators(self):
        """Positive-part generators: [('x', cid, degree), ('w', hi, lo, degree)]."""
        gens = [("x", c.cid, c.i_x()) for c in self.crossings]
        for hi, lo, present, deg in self.wall_pairs():
            if present:
                gens.append(("w", hi, lo, deg))
        return gens

    def gen_weight(self, gen):
        if gen[0] == "x":
            return self.heights[gen[1]]
        return self.z[("ze", gen[1])] - self.z[("ze", gen[2])]

    def e_weight(self) -> int:
        """sum over positive generators of degree <= 0 of (-1)^deg (the
        Euler-type exponent in the counting measure)."""
        e = 0
        for g in self.generators():
            d = g[-1]
            if d <= 0:
                e += 1 if d % 2 == 0 else -1
        return e

    def euler_count_e(self) -> int:
        """Crossing count form: #(i_x<0 even) - #(i_x<0 odd)."""
        e = 0
        for c in self.crossings:
            if c.i_x() < 0:
                e += 1 if c.i_x() % 2 == 0 else -1
        return e

    def writhe(self) -> int:
        if self.wall_ends:
            raise FrontError("writhe requires a closed link")
        w = 0
        for c in self.crossings:
            sgn = 1 if (c.mu_up - c.mu_dn) % 2 == 0 else -1
            w += sgn if c.over == "up" else -sgn
        return w

    def component_count(self) -> int:
        return len(self.components)

    # -- misc ----------------------------------------------------------------

    def flipped(self, cids, feasible=True):
        """The diagram with the z-over branch toggled at the given crossings
        (same projection, different link)."""
        other = LagDiagram.from_front(self.front, feasible=False)
        for cid in cids:
            c = other.crossings[cid]
            c.over = "up" if c.over == "down" else "down"
        if feasible:
            other.solve_feasibility()
        return other

    def arc_segments(self, aid):
        """All (gap, pos, dir) strand segments of an arc traversed tail->head."""
        segs = []
        for pid, d in self.arcs[aid]["run"]:
            for g, pos in self.pieces[pid]["life"]:
                segs.append((g, pos, d))
        return segs

    def min_interior_area(self):
        vals = [a for f, a in self.areas.items()]
        return min(vals) if vals else Fraction(1)
