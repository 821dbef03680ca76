"""Curved structure maps from polygon counting, Maurer-Cartan solutions,
gauge transport, the dual differential algebra, and the counting measure.

The structure coefficients m_n(a_n, ..., a_1) count immersed polygons with
convex corners: boundary walks with the disk on the left, one ascending
corner (the output, jumping from the z-under to the z-over branch) and
descending input corners.  Each polygon carries a sign from component
orientations (odd-degree corners whose following side runs against the
orientation) and a monodromy monomial from marked-arc traversals.

Completeness of the depth-first search rests on the exact area identity
area(D) = h(output) - sum h(inputs) > 0: inputs are pruned against the
output height, and the multiplicity of any strand segment is bounded by
area / (minimal interior face area).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .diagram import LagDiagram, PARTNER, STRAND_OF, cw_next_port
from .gfp import is_prime


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class Polygon:
    out_gen: tuple
    inputs: tuple          # input generators in boundary order after the output
    sign: int              # +1 / -1
    monomial: tuple        # monodromy exponent per closed component
    mults: dict            # face -> multiplicity
    area: Fraction


@dataclass
class CurvedAlg:
    lag: LagDiagram
    gens: tuple            # generator ids ('x', cid) / ('w', hi, lo)
    degree: dict
    weight: dict
    components: tuple      # closed components carrying monodromy symbols
    tables: dict           # (out, ins_paper_order) -> {monomial: int}
    polygons: list = field(default_factory=list)

    def deg1(self):
        return [g for g in self.gens if self.degree[g] == 1]

    def deg_of(self, g):
        return self.degree[g]

    def entry_coeff(self, out, ins):
        return self.tables.get((out, ins), {})


# ---------------------------------------------------------------------------
# polygon enumeration


def _out_dart(lag, port):
    aid, endn = lag.arc_end_at(port)
    return (aid, 1 if endn == "tail" else -1)


def _head_port(lag, dart):
    a = lag.arcs[dart[0]]
    return a["head"] if dart[1] == 1 else a["tail"]


def enumerate_disks(lag: LagDiagram, max_corners=8, step_budget=200000):
    """All immersed polygons contributing to the structure maps."""
    if not hasattr(lag, "heights"):
        lag.solve_feasibility()
    polys = []
    min_area = lag.min_interior_area()
    genset = {("x", c.cid): c.i_x() for c in lag.crossings}
    wall_lookup = {}
    for hi, lo, present, deg in lag.wall_pairs():
        wall_lookup[(hi, lo)] = (present, deg)
        if present:
            genset[("w", hi, lo)] = deg
    # the faces immediately left of each arc dart; any valid boundary walk
    # covers every face it touches on its disk side at least once
    left_faces = {}
    for a in lag.arcs:
        segs = lag.arc_segments(a["id"])
        fwd = frozenset(lag.seg_faces(g, pos)[1] if d == 1 else lag.seg_faces(g, pos)[0]
                        for g, pos, d in segs)
        bwd = frozenset(lag.seg_faces(g, pos)[0] if d == 1 else lag.seg_faces(g, pos)[1]
                        for g, pos, d in segs)
        left_faces[(a["id"], 1)] = fwd
        left_faces[(a["id"], -1)] = bwd
    ctx = {"left": left_faces, "areas": lag.areas,
           "forbidden": lag.forbidden_faces, "min_area": min_area}
    for c in lag.crossings:
        # ascending quadrants: in on the under strand, out on the over strand
        quads = (("WL", "WU"), ("WU", "EU"), ("EU", "EL"), ("EL", "WL"))
        for pin, pout in quads:
            asc = (STRAND_OF[pin] != c.over) and (STRAND_OF[pout] == c.over)
            if not asc:
                continue
            _walk_from(lag, c, pin, pout, genset, wall_lookup, polys,
                       max_corners, step_budget, ctx)
    return polys


_QUAD = {("WL", "WU"): "W", ("WU", "EU"): "N", ("EU", "EL"): "E",
         ("EL", "WL"): "S"}


def _walk_from(lag, c, pin, pout, genset, wall_lookup, polys,
               max_corners, step_budget, ctx):
    out_gen = ("x", c.cid)
    h_out = lag.heights[c.cid]
    start = _out_dart(lag, ("X", c.cid, pout))
    cap = 2 * int(h_out / ctx["min_area"]) + 2
    budget = [step_budget]
    left = ctx["left"]
    forbidden = ctx["forbidden"]
    areas = ctx["areas"]

    # state: dart, inputs list, weight sum, dart usage, dart trail,
    # touched = faces known to be covered (with their total area)
    def walk(dart, inputs, wsum, usage, trail, touched, tarea):
        if budget[0] <= 0:
            raise BudgetExceeded("polygon search step budget exceeded")
        budget[0] -= 1
        if usage.get(dart, 0) >= cap:
            return
        new = left[dart] - touched
        if new:
            if new & forbidden:
                return
            touched = touched | new
            tarea = tarea + sum(areas[f] for f in new)
        if tarea > h_out - wsum:
            return
        usage = dict(usage)
        usage[dart] = usage.get(dart, 0) + 1
        trail = trail + [dart]
        port = _head_port(lag, dart)
        if port[0] == "J":
            nxt = _out_dart(lag, (port[0], port[1], "E" if port[2] == "W" else "W"))
            walk(nxt, inputs, wsum, usage, trail, touched, tarea)
            return
        if port[0] == "wall":
            eid = port[1]
            e = lag.wall_ends[eid]
            for other in lag.wall_vertices[e.vertex]:
                o = lag.wall_ends[other]
                if o.pos >= e.pos:
                    continue
                info = wall_lookup.get((eid, other))
                if info is None or not info[0]:
                    continue  # no positive generator for this pair
                g = ("w", eid, other)
                w = lag.gen_weight(g)
                if len(inputs) + 1 > max_corners - 1 or wsum + w >= h_out:
                    continue
                walk(_out_dart(lag, ("wall", other)),
                     inputs + [(g, trail, None)], wsum + w, usage, [],
                     touched, tarea)
            return
        # crossing port
        cid2 = port[1]
        pname = port[2]
        # straight through
        walk(_out_dart(lag, ("X", cid2, PARTNER[pname])), inputs, wsum, usage,
             trail, touched, tarea)
        # corner
        qout = cw_next_port(pname)
        if cid2 == c.cid and pname == pin and qout == pout:
            _record(lag, polys, out_gen, _QUAD[(pin, pout)], inputs, trail, genset)
            return
        c2 = lag.crossings[cid2]
        desc = (STRAND_OF[pname] == c2.over) and (STRAND_OF[qout] != c2.over)
        if desc:
            g = ("x", cid2)
            w = lag.heights[cid2]
            if len(inputs) + 1 <= max_corners - 1 and wsum + w < h_out:
                quad = _QUAD[(pname, qout)]
                walk(_out_dart(lag, ("X", cid2, qout)),
                     inputs + [(g, trail, quad)], wsum + w, usage, [],
                     touched, tarea)

    walk(start, [], Fraction(0), {}, [], frozenset(), Fraction(0))


def _record(lag, polys, out_gen, out_quad, inputs, last_trail, genset):
    """Validate a closed walk and store it as a polygon."""
    segments = [tr for (_, tr, _) in inputs] + [last_trail]
    all_darts = [d for tr in segments for d in tr]
    # winding multiplicities
    flow = {}
    for aid, d in all_darts:
        for g, pos, dseg in lag.arc_segments(aid):
            flow[(g, pos)] = flow.get((g, pos), 0) + (1 if dseg * d == 1 else -1)
    mult = _solve_mults(lag, flow)
    if mult is None:
        return
    for f in lag.forbidden_faces:
        if mult.get(f, 0) != 0:
            return
    if any(v < 0 for v in mult.values()):
        return
    # corner quadrants covered
    if not _quadrants_covered(lag, out_gen, out_quad, inputs, mult):
        return
    # degree identity
    n = len(inputs)
    d_out = genset[out_gen]
    d_ins = [genset[g] for g, _, _ in inputs]
    if d_out != sum(d_ins) + 2 - n:
        return
    # area identity (Stokes)
    area = lag.gen_weight(out_gen) - sum(lag.gen_weight(g) for g, _, _ in inputs)
    stokes = sum(lag.areas[f] * m for f, m in mult.items() if m)
    assert area == stokes, f"area {area} != covered {stokes}"
    if area <= 0:
        return
    sign = _sign(lag, out_gen, inputs, segments, genset)
    mono = _monomial(lag, all_darts)
    polys.append(Polygon(out_gen, tuple(g for g, _, _ in inputs), sign, mono,
                         {f: m for f, m in mult.items() if m}, area))


def _solve_mults(lag, flow):
    mult = {}
    start = next(iter(lag.forbidden_faces), 0)
    mult[start] = 0
    # adjacency: all segments
    segs = []
    for g in range(lag.n_gaps):
        for pos in range(lag._gap_counts[g]):
            below, above = lag.seg_faces(g, pos)
            segs.append((below, above, flow.get((g, pos), 0)))
    changed = True
    it = 0
    while changed:
        changed = False
        it += 1
        if it > len(segs) + 2:
            break
        for below, above, fl in segs:
            if above in mult and below not in mult:
                mult[below] = mult[above] - fl
                changed = True
            elif below in mult and above not in mult:
                mult[above] = mult[below] + fl
                changed = True
    for below, above, fl in segs:
        if mult.get(above, 0) - mult.get(below, 0) != fl:
            return None
    for f in range(lag.n_faces):
        mult.setdefault(f, 0)
    return mult


def _quadrants_covered(lag, out_gen, out_quad, inputs, mult):
    corners = [(g, q) for g, _, q in inputs] + [(out_gen, out_quad)]
    for g, q in corners:
        if g[0] == "x":
            if mult.get(lag.quadrant_face(g[1], q), 0) < 1:
                return False
        else:
            _, hi, lo = g
            for f in lag.wedge_faces(hi, lo):
                if mult.get(f, 0) < 1:
                    return False
    return True


def _sign(lag, out_gen, inputs, segments, genset):
    s = 0
    # inputs[k][1] is the trail INTO corner x_k, so the side after x_k is
    # segments[k+1] (for the last input: the closing trail into the output).
    for k, (g, _, _) in enumerate(inputs):
        d = genset[g]
        if d % 2 == 0:
            continue
        side = segments[k + 1]
        if _side_reversed(lag, side):
            s += 1
    d_out = genset[out_gen]
    if d_out % 2 == 1 and segments and _side_reversed(lag, segments[-1]):
        s += 1
    return -1 if s % 2 else 1


def _side_reversed(lag, side):
    vals = {d * lag.arcs[aid]["orient"] for aid, d in side}
    assert len(vals) == 1, "side with mixed orientation"
    return vals.pop() == -1


def _monomial(lag, darts):
    comps = [c for c in lag.closed_components]
    expo = {c: 0 for c in comps}
    for aid, d in darts:
        a = lag.arcs[aid]
        if a["marked"]:
            expo[a["comp"]] += d * a["orient"]
    return tuple(expo[c] for c in comps)


# ---------------------------------------------------------------------------
# structure maps


def structure_maps(lag: LagDiagram, max_corners=8) -> CurvedAlg:
    polys = enumerate_disks(lag, max_corners=max_corners)
    gens = tuple(("x", c.cid) for c in lag.crossings) + tuple(
        ("w", hi, lo) for hi, lo, present, _ in lag.wall_pairs() if present)
    degree = {}
    weight = {}
    for g in gens:
        if g[0] == "x":
            degree[g] = lag.crossings[g[1]].i_x()
        else:
            degree[g] = next(d for hi, lo, pres, d in lag.wall_pairs()
                             if (hi, lo) == (g[1], g[2]))
        weight[g] = lag.gen_weight(g)
    tables = {}
    for poly in polys:
        key = (poly.out_gen, tuple(reversed(poly.inputs)))
        tab = tables.setdefault(key, {})
        tab[poly.monomial] = tab.get(poly.monomial, 0) + poly.sign
    tables = {k: {m: c for m, c in v.items() if c} for k, v in tables.items()}
    tables = {k: v for k, v in tables.items() if v}
    alg = CurvedAlg(lag, gens, degree, weight,
                    tuple(lag.closed_components), tables, polys)
    return alg


def monomial_eval(mono, coeff, lams, p):
    v = coeff % p
    for e, lam in zip(mono, lams):
        v = (v * pow(lam, e % (p - 1), p)) % p if p > 2 else v
    return v % p


def coeff_eval(table_val, lams, p):
    return sum(monomial_eval(m, c, lams, p) for m, c in table_val.items()) % p


# ---------------------------------------------------------------------------
# curved A-infinity relations


def a_infinity_check(alg: CurvedAlg, p: int, return_failure=False):
    """Verify the curved relations with monodromies specialized over all of
    (F_p^x)^components.  Returns True, or (False, failing-instance)."""
    assert is_prime(p)
    buckets = {}

    def parity(g):
        return (alg.degree[g] - 1) % 2

    entries = [(out, ins, val) for (out, ins), val in alg.tables.items()]
    for out_o, ins_o, val_o in entries:
        for pos in range(len(ins_o)):
            for out_i, ins_i, val_i in entries:
                if out_i != ins_o[pos]:
                    continue
                full = ins_o[:pos] + ins_i + ins_o[pos + 1:]
                tail = ins_o[pos + 1:]
                sgn = -1 if sum(parity(g) for g in tail) % 2 else 1
                key = (full, out_o)
                tab = buckets.setdefault(key, {})
                for m1, c1 in val_o.items():
                    for m2, c2 in val_i.items():
                        mono = tuple(a + b for a, b in zip(m1, m2))
                        tab[mono] = tab.get(mono, 0) + sgn * c1 * c2
    nlam = len(alg.components)
    units = [t for t in product(range(1, p), repeat=nlam)]
    for key, tab in buckets.items():
        tab = {m: c for m, c in tab.items() if c}
        if not tab:
            continue
        for lams in units:
            if coeff_eval(tab, lams, p) != 0:
                if return_failure:
                    return False, (key, tab, lams)
                return False
    return (True, None) if return_failure else True


# ---------------------------------------------------------------------------
# Maurer-Cartan


def mc_enumerate(alg: CurvedAlg, p: int, budget=2_000_000):
    """All (monodromy tuple, degree-1 assignment) solving the MC equation."""
    assert is_prime(p)
    g1 = alg.deg1()
    nlam = len(alg.components)
    total = (p ** len(g1)) * ((p - 1) ** nlam)
    if total > budget:
        raise BudgetExceeded(f"MC enumeration size {total} exceeds budget")
    mc_entries = []
    outs = set()
    for (out, ins), val in alg.tables.items():
        if all(alg.degree[g] == 1 for g in ins):
            assert alg.degree[out] == 2
            mc_entries.append((out, ins, val))
            outs.add(out)
    sols = []
    for lams in product(range(1, p), repeat=nlam):
        coeffs = [(out, ins, coeff_eval(val, lams, p))
                  for out, ins, val in mc_entries]
        for assignment in product(range(p), repeat=len(g1)):
            delta = dict(zip(g1, assignment))
            acc = {o: 0 for o in outs}
            ok = True
            for out, ins, cval in coeffs:
                if cval == 0:
                    continue
                t = cval
                for g in ins:
                    t = (t * delta[g]) % p
                    if t == 0:
                        break
                acc[out] = (acc[out] + t) % p
            ok = all(v == 0 for v in acc.values())
            if ok:
                sols.append((lams, delta))
    return sols


def mc_count(alg, p):
    return len(mc_enumerate(alg, p))


def measure_scalar(lag: LagDiagram, p: int) -> Fraction:
    """(p-1)^{-#components} p^{-e} #MC: the total mass of the link's image."""
    alg = structure_maps(lag)
    n = len(lag.components)
    e = lag.e_weight()
    cnt = mc_count(alg, p)
    return Fraction(cnt) * Fraction(1, (p - 1) ** n) * Fraction(p) ** (-e)


# ---------------------------------------------------------------------------
# gauge transport


def gauge_transport(alg: CurvedAlg, p: int, lams, delta: dict, x: dict):
    """The unique delta' with 1+x in I(delta, delta'); filtration recursion."""
    g1 = alg.deg1()
    g0 = [g for g in alg.gens if alg.degree[g] == 0]
    xfull = {g: x.get(g, 0) % p for g in g0}
    cur = dict(delta)
    for _ in range(64):
        nxt = {}
        for g in g1:
            nxt[g] = delta.get(g, 0) % p
        for (out, ins), val in alg.tables.items():
            if alg.degree[out] != 1:
                continue
            cval = coeff_eval(val, lams, p)
            if cval == 0:
                continue
            for ell, gslot in enumerate(ins):
                if alg.degree[gslot] != 0:
                    continue
                if any(alg.degree[h] != 1 for k, h in enumerate(ins) if k != ell):
                    continue
                t = (cval * xfull.get(gslot, 0)) % p
                for k, h in enumerate(ins):
                    if k == ell:
                        continue
                    t = (t * (cur[h] if k < ell else delta.get(h, 0))) % p
                nxt[out] = (nxt[out] - t) % p
        if nxt == cur:
            return cur
        cur = nxt
    raise RuntimeError("gauge recursion did not stabilize")


def satisfies_mc(alg: CurvedAlg, p: int, lams, delta: dict) -> bool:
    acc = {}
    for (out, ins), val in alg.tables.items():
        if any(alg.degree[g] != 1 for g in ins):
            continue
        t = coeff_eval(val, lams, p)
        for g in ins:
            t = (t * delta.get(g, 0)) % p
        acc[out] = (acc.get(out, 0) + t) % p
    return all(v % p == 0 for v in acc.values())


# ---------------------------------------------------------------------------
# dual differential graded algebra


@dataclass
class DGA:
    gens: tuple          # (name, ce_degree)
    monodromies: tuple   # invertible generators, one per closed component
    diff: dict           # name -> list of (int coeff, monomial, word) terms

    def pretty(self) -> str:
        lines = []
        for name, d in self.gens:
            lines.append(f"gen {name} deg {d}")
        for t in self.monodromies:
            lines.append(f"unit {t}")
        for name, _ in self.gens:
            terms = self.diff.get(name, [])
            if not terms:
                lines.append(f"d {name} = 0")
                continue
            parts = []
            for coeff, mono, word in terms:
                bits = []
                if coeff != 1 or (not word and not any(mono)):
                    bits.append(str(coeff))
                for tname, e in mono:
                    if e:
                        bits.append(f"{tname}^{e}" if e != 1 else tname)
                bits.extend(word)
                parts.append("*".join(bits) if bits else "1")
            lines.append(f"d {name} = " + " + ".join(parts))
        return "\n".join(lines) + "\n"


def gen_name(alg, g):
    if g[0] == "x":
        return f"a{g[1]}"
    return f"b{g[1]}_{g[2]}"


def ce_dga(alg: CurvedAlg) -> DGA:
    """Free dual algebra: generator degrees drop by one, the differential of
    a dual generator reads off all structure coefficients landing on it."""
    names = {g: gen_name(alg, g) for g in alg.gens}
    tnames = tuple(f"t{c}" for c in alg.components)
    gens = tuple((names[g], alg.degree[g] - 1) for g in alg.gens)
    diff = {names[g]: [] for g in alg.gens}
    for (out, ins), val in alg.tables.items():
        word = tuple(names[g] for g in ins)
        for mono, coeff in val.items():
            diff[names[out]].append(
                (coeff, tuple(zip(tnames, mono)), word))
    for k in diff:
        diff[k].sort(key=str)
    return DGA(gens, tnames, diff)


def dga_augmentations(dga: DGA, p: int):
    """Count algebra maps to F_p: values on degree-0 generators, monodromy
    units invertible, vanishing on differentials of degree-1 generators."""
    deg0 = [n for n, d in dga.gens if d == 0]
    deg1 = [n for n, d in dga.gens if d == 1]
    others = [n for n, d in dga.gens if d not in (0, 1)]
    count = 0
    for tvals in product(range(1, p), repeat=len(dga.monodromies)):
        tmap = dict(zip(dga.monodromies, tvals))
        for vals in product(range(p), repeat=len(deg0)):
            env = dict(zip(deg0, vals))
            ok = True
            for h in deg1:
                s = 0
                for coeff, mono, word in dga.diff.get(h, []):
                    t = coeff % p
                    for tname, e in mono:
                        t = (t * pow(tmap[tname], e % (p - 1), p)) % p if p > 2 else t
                    for w in word:
                        t = (t * env.get(w, 0)) % p  # non-deg-0 letters kill the term
                        if t == 0:
                            break
                    s = (s + t) % p
                if s % p:
                    ok = False
                    break
            if ok:
                count += 1
    return count
