"""Triangulated surfaces (Delta-complexes) with edges labelled by group
elements, their validation and invariants, and the builders that turn
commutator decompositions into surfaces.

A triangle is stored as (e0, e1, e2, sign): e_i is the edge on the face
opposite vertex i, so with vertices v0 < v1 < v2 we have e2 = [v0,v1],
e0 = [v1,v2], e1 = [v0,v2]. The sign orients the triangle; an edge on face
i picks up coefficient sign * (-1)^i, and interior edges must receive
opposite coefficients from their two sides.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .chains import Chain1, Chain2
from .words import Alphabet, Word, _comm, _inv, _mul

__all__ = [
    "LabelledSurface",
    "validate",
    "invariants",
    "build_from_decomposition",
    "split_boundary",
    "chi_ratio",
    "disjoint_union",
    "surface_for_chain",
    "SURGERY_DELTAS",
]

# (delta chi, delta boundary count, delta total genus) per surgery on a
# connected surface; m = number of pieces, a = number of merged copies
SURGERY_DELTAS = {
    "split": lambda m: (-(m - 1), m - 1, 0),
    "merge": lambda a: (-(a - 1), -(a - 1), a - 1),
    "cap": lambda _: (0, -2, 1),
    "conjugate": lambda _: (0, 0, 0),
    "fill": lambda _: (1, -1, 0),
}


@dataclass
class LabelledSurface:
    rank: int
    n_vertices: int = 0
    edges: list = field(default_factory=list)       # (tail, head, label letters)
    triangles: list = field(default_factory=list)   # (e0, e1, e2, sign)
    n_S: Optional[int] = None

    def copy(self) -> "LabelledSurface":
        return LabelledSurface(self.rank, self.n_vertices, list(self.edges), list(self.triangles), self.n_S)

    def add_vertex(self) -> int:
        self.n_vertices += 1
        return self.n_vertices - 1

    def add_edge(self, tail: int, head: int, label) -> int:
        letters = label.letters if isinstance(label, Word) else tuple(label)
        self.edges.append((tail, head, letters))
        return len(self.edges) - 1

    def add_triangle(self, e0: int, e1: int, e2: int, sign: int) -> int:
        self.triangles.append((e0, e1, e2, sign))
        return len(self.triangles) - 1

    def label(self, e: int) -> Word:
        return Word(self.edges[e][2], self.rank)

    def merge_vertices(self, keep: int, drop: int) -> None:
        if keep == drop:
            return
        def fix(v):
            v = keep if v == drop else v
            return v - 1 if v > drop else v

        self.edges = [(fix(t), fix(h), lab) for t, h, lab in self.edges]
        self.n_vertices -= 1

    def incidences(self) -> dict:
        inc = defaultdict(list)
        for ti, (e0, e1, e2, s) in enumerate(self.triangles):
            for face, e in enumerate((e0, e1, e2)):
                inc[e].append((ti, face, s * (-1) ** face))
        return inc

    def boundary_edges(self) -> list:
        """[(edge, coefficient)] for edges lying on exactly one face."""
        inc = self.incidences()
        return [(e, inc[e][0][2]) for e in range(len(self.edges)) if len(inc[e]) == 1]

    def to_chain2(self) -> Chain2:
        """sum over triangles of sign * (f(e2), f(e0))."""
        return Chain2([((self.label(e2), self.label(e0)), s) for e0, e1, e2, s in self.triangles], self.rank)

    def boundary_chain(self) -> Chain1:
        return Chain1([(self.label(e), c) for e, c in self.boundary_edges()], self.rank)

    def to_json(self) -> dict:
        out = {
            "rank": self.rank,
            "vertices": self.n_vertices,
            "edges": [[t, h, str(Word(lab, self.rank))] for t, h, lab in self.edges],
            "triangles": [list(t) for t in self.triangles],
        }
        if self.n_S is not None:
            out["n_S"] = self.n_S
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LabelledSurface":
        rank = int(data["rank"])
        alpha = Alphabet(rank)
        S = cls(rank, int(data["vertices"]))
        for t, h, lab in data["edges"]:
            S.add_edge(int(t), int(h), alpha.parse(lab))
        for tri in data["triangles"]:
            e0, e1, e2, s = (int(v) for v in tri)
            S.add_triangle(e0, e1, e2, s)
        S.n_S = data.get("n_S")
        return S


def _vertex_links(S: LabelledSurface) -> dict:
    """Per vertex: link graph on edge-ends (edge, 0=tail/1=head)."""
    links = defaultdict(lambda: defaultdict(list))
    for e0, e1, e2, _ in S.triangles:
        # corner at v0: ends e2.tail, e1.tail; v1: e2.head, e0.tail; v2: e0.head, e1.head
        corners = [((e2, 0), (e1, 0)), ((e2, 1), (e0, 0)), ((e0, 1), (e1, 1))]
        for a, b in corners:
            v = S.edges[a[0]][a[1]]
            links[v][a].append(b)
            links[v][b].append(a)
    return links


def validate(pair, S: LabelledSurface) -> list:
    """Diagnostics; empty iff the complex is an oriented surface, every
    triangle satisfies f(e2) f(e0) = f(e1), and (for a proper pair) every
    triangle has f(e0) or f(e2) in N."""
    out = []
    nE = len(S.edges)
    for i, (t, h, lab) in enumerate(S.edges):
        if not (0 <= t < S.n_vertices and 0 <= h < S.n_vertices):
            out.append(f"edge {i}: endpoint out of range")
        try:
            Alphabet(S.rank).check(lab)
        except ValueError as exc:
            out.append(f"edge {i}: {exc}")
    if out:
        return out
    for ti, (e0, e1, e2, s) in enumerate(S.triangles):
        if not all(0 <= e < nE for e in (e0, e1, e2)):
            out.append(f"triangle {ti}: edge index out of range")
            continue
        if s not in (1, -1):
            out.append(f"triangle {ti}: sign must be +1 or -1")
        E = S.edges
        if not (E[e2][0] == E[e1][0] and E[e2][1] == E[e0][0] and E[e0][1] == E[e1][1]):
            out.append(f"triangle {ti}: faces do not fit together at the vertices")
        if _mul(E[e2][2], E[e0][2]) != E[e1][2]:
            out.append(f"triangle {ti}: f(e2) f(e0) != f(e1) "
                       f"({S.label(e2)} * {S.label(e0)} vs {S.label(e1)})")
        if pair is not None and not pair.is_plain:
            if not (pair.in_N_letters(E[e0][2]) or pair.in_N_letters(E[e2][2])):
                out.append(f"triangle {ti}: neither f(e0) nor f(e2) lies in N")
    if out:
        return out
    inc = S.incidences()
    for e in range(nE):
        k = len(inc[e])
        if k == 0:
            out.append(f"edge {e}: not on any triangle")
        elif k > 2:
            out.append(f"edge {e}: on {k} triangle faces")
        elif k == 2 and inc[e][0][2] + inc[e][1][2] != 0:
            out.append(f"edge {e}: orientations of the two sides agree (not orientable)")
    links = _vertex_links(S)
    used = {t for t, _, _ in S.edges} | {h for _, h, _ in S.edges}
    for v in range(S.n_vertices):
        if v not in used:
            out.append(f"vertex {v}: isolated")
            continue
        graph = links.get(v, {})
        if not graph:
            out.append(f"vertex {v}: no triangle corners")
            continue
        degs = [len(nb) for nb in graph.values()]
        if any(d > 2 for d in degs):
            out.append(f"vertex {v}: link is not a curve")
            continue
        ends = sum(1 for d in degs if d == 1)
        start = next(iter(graph))
        seen = {start}
        stack = [start]
        while stack:
            a = stack.pop()
            for b in graph[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        if len(seen) != len(graph) or ends not in (0, 2):
            out.append(f"vertex {v}: link is not a single arc or circle")
    return out


def _components(S: LabelledSurface) -> list:
    parent = list(range(S.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t, h, _ in S.edges:
        parent[find(t)] = find(h)
    comps = defaultdict(lambda: {"V": 0, "E": 0, "F": 0, "b": 0})
    for v in range(S.n_vertices):
        comps[find(v)]["V"] += 1
    for t, _, _ in S.edges:
        comps[find(t)]["E"] += 1
    for e0, _, _, _ in S.triangles:
        comps[find(S.edges[e0][0])]["F"] += 1
    for cyc in _boundary_cycles(S):
        comps[find(S.edges[cyc[0][0]][0])]["b"] += 1
    return [comps[r] for r in sorted(comps)]


def _boundary_cycles(S: LabelledSurface) -> list:
    """Boundary components as lists of (edge, +1 forward / -1 backward)."""
    bnd = S.boundary_edges()
    out_at = defaultdict(list)
    for e, c in bnd:
        t, h, _ = S.edges[e]
        start = t if c > 0 else h
        out_at[start].append((e, c))
    used = set()
    cycles = []
    for e, c in sorted(bnd):
        if e in used:
            continue
        cyc = []
        cur = (e, c)
        while cur[0] not in used:
            used.add(cur[0])
            cyc.append(cur)
            t, h, _ = S.edges[cur[0]]
            end = h if cur[1] > 0 else t
            nxt = [x for x in out_at[end] if x[0] not in used]
            if not nxt:
                break
            cur = nxt[0]
        cycles.append(cyc)
    return cycles


def invariants(S: LabelledSurface, pair=None) -> dict:
    diags = validate(pair, S)
    if diags:
        raise ValueError("invalid surface: " + "; ".join(diags[:5]))
    comps = _components(S)
    chi = S.n_vertices - len(S.edges) + len(S.triangles)
    genus = []
    chi_minus = 0
    for c in comps:
        x = c["V"] - c["E"] + c["F"]
        g2 = 2 - x - c["b"]
        genus.append(g2 // 2)
        if not (c["b"] == 0 and x == 2):
            chi_minus += x
    words = []
    for cyc in _boundary_cycles(S):
        w: tuple = ()
        for e, c in cyc:
            lab = S.edges[e][2]
            w = _mul(w, lab if c > 0 else _inv(lab))
        words.append(Word(w, S.rank))
    return {
        "euler": chi,
        "genus": genus,
        "boundary_count": sum(c["b"] for c in comps),
        "chi_minus": chi_minus,
        "boundary_words": words,
        "components": len(comps),
    }


# ---- gadgets ---------------------------------------------------------------

def _handle(S: LabelledSurface, P: int, g: tuple, x: tuple) -> int:
    """Punctured torus with boundary loop [g,x] at P; returns that edge."""
    c = _comm(g, x)
    e_c = S.add_edge(P, P, c)
    e_gx = S.add_edge(P, P, _mul(g, x))
    e_xg = S.add_edge(P, P, _mul(x, g))
    e_g = S.add_edge(P, P, g)
    e_x = S.add_edge(P, P, x)
    S.add_triangle(e_xg, e_gx, e_c, 1)     # ([g,x], xg)
    S.add_triangle(e_x, e_gx, e_g, -1)     # (g, x)
    S.add_triangle(e_g, e_xg, e_x, 1)      # (x, g)
    return e_c


def _coef(S: LabelledSurface, e: int) -> int:
    inc = S.incidences()[e]
    if len(inc) != 1:
        raise ValueError(f"edge {e} is not a boundary edge")
    return inc[0][2]


def _conjugate(S: LabelledSurface, e_z: int, h: tuple, x: tuple) -> int:
    """Annulus from boundary loop z = h x h^-1 to a loop x at a new vertex."""
    z = S.edges[e_z][2]
    if _mul(_mul(h, x), _inv(h)) != z:
        raise ValueError("conjugation surgery: label is not h x h^-1")
    c = _coef(S, e_z)
    t, hd, _ = S.edges[e_z]
    if t != hd:
        raise ValueError("conjugation surgery needs a boundary loop")
    P = t
    Q = S.add_vertex()
    e_h = S.add_edge(P, Q, h)
    e_hx = S.add_edge(P, Q, _mul(h, x))
    e_x = S.add_edge(Q, Q, x)
    S.add_triangle(e_h, e_hx, e_z, -c)
    S.add_triangle(e_x, e_hx, e_h, c)
    return e_x


def _split_once(S: LabelledSurface, e_y: int, left: tuple, right: tuple) -> tuple:
    y = S.edges[e_y][2]
    if _mul(left, right) != y:
        raise ValueError("split surgery: pieces do not multiply to the boundary label")
    c = _coef(S, e_y)
    P = S.edges[e_y][0]
    if S.edges[e_y][1] != P:
        raise ValueError("split surgery needs a boundary loop")
    e_l = S.add_edge(P, P, left)
    e_r = S.add_edge(P, P, right)
    S.add_triangle(e_r, e_y, e_l, c)
    return e_l, e_r


def _fill_disc(S: LabelledSurface, e: int) -> None:
    """Cone off a trivially labelled boundary loop."""
    if S.edges[e][2]:
        raise ValueError("only trivially labelled loops bound a disc")
    c = _coef(S, e)
    P = S.edges[e][0]
    Q = S.add_vertex()
    u = S.add_edge(P, Q, ())
    S.add_triangle(u, u, e, -c)


def _loop_at_new_vertex(S: LabelledSurface, e: int) -> int:
    return _conjugate(S, e, (), S.edges[e][2])


def build_from_decomposition(pair, decomposition, rank: Optional[int] = None) -> LabelledSurface:
    """Genus-k surface with one boundary loop labelled y = prod [g_i, x_i].

    Each commutator is a punctured torus; a fan of triangles joins their
    boundaries. For k = 0 a cone on a trivial loop (one triangle) is returned.
    """
    pairs = decomposition.pairs if hasattr(decomposition, "pairs") else list(decomposition)
    pairs = [(g.letters if isinstance(g, Word) else tuple(g), x.letters if isinstance(x, Word) else tuple(x))
             for g, x in pairs]
    if rank is None:
        rank = pair.alphabet.rank
    for _, x in pairs:
        if pair is not None and not pair.is_plain and not pair.in_N_letters(x):
            raise ValueError(f"{Word(x, rank)} is not in N")
    S = LabelledSurface(rank)
    P = S.add_vertex()
    if not pairs:
        e = S.add_edge(P, P, ())
        Q = S.add_vertex()
        u = S.add_edge(P, Q, ())
        S.add_triangle(u, u, e, 1)
        return S
    loops = [_handle(S, P, g, x) for g, x in pairs]
    acc = loops[0]
    prod = S.edges[acc][2]
    for e_c in loops[1:]:
        prod = _mul(prod, S.edges[e_c][2])
        d = S.add_edge(P, P, prod)
        S.add_triangle(e_c, d, acc, -1)
        acc = d
    return S


def _boundary_loop_with(S: LabelledSurface, label: tuple, exclude=()) -> int:
    for e, _ in S.boundary_edges():
        t, h, lab = S.edges[e]
        if lab == label and t == h and e not in exclude:
            return e
    raise ValueError(f"no boundary loop labelled {Word(label, S.rank)}")


def split_boundary(S: LabelledSurface, grouping: dict) -> LabelledSurface:
    """Apply one surgery and return a new surface.

    grouping["op"] is one of
      split:     {"edge"?, "label", "pieces": [x_i], "conjugators"?: [h_i]}
                 label = prod h_i x_i h_i^-1; boundary becomes loops x_i
      merge:     {"label": x, "copies": a}  a loops labelled x become x^a
      cap:       {"label": x}  loops x and x^-1 are capped off together
      conjugate: {"label": z, "h": h, "x": x} with z = h x h^-1
    Words may be Word objects or letter tuples.
    """
    S = S.copy()
    op = grouping["op"]

    def lt(w):
        return w.letters if isinstance(w, Word) else tuple(w)

    if op == "split":
        label = lt(grouping["label"])
        e = grouping.get("edge")
        e = _boundary_loop_with(S, label) if e is None else e
        pieces = [lt(w) for w in grouping["pieces"]]
        hs = [lt(h) for h in grouping.get("conjugators", [()] * len(pieces))]
        zs = [_mul(_mul(h, x), _inv(h)) for h, x in zip(hs, pieces)]
        outs = []
        rest_e = e
        for i in range(len(zs) - 1):
            rest = ()
            for z in zs[i + 1:]:
                rest = _mul(rest, z)
            left_e, rest_e = _split_once(S, rest_e, zs[i], rest)
            outs.append(left_e)
        outs.append(rest_e)
        for e_z, h, x in zip(outs, hs, pieces):
            _conjugate(S, e_z, h, x)
    elif op == "merge":
        x = lt(grouping["label"])
        a = int(grouping["copies"])
        es = []
        for _ in range(a):
            es.append(_boundary_loop_with(S, x, exclude=es))
        c = _coef(S, es[0])
        if any(_coef(S, e) != c for e in es):
            raise ValueError("merge surgery: loops must be oriented alike")
        acc = es[0]
        prod = x
        for e in es[1:]:
            S.merge_vertices(S.edges[acc][0], S.edges[e][0])
            prod = _mul(prod, x)
            d = S.add_edge(S.edges[acc][0], S.edges[acc][0], prod)
            S.add_triangle(e, d, acc, -c)
            acc = d
        _loop_at_new_vertex(S, acc)
    elif op == "cap":
        x = lt(grouping["label"])
        e1 = _boundary_loop_with(S, x)
        e2 = _boundary_loop_with(S, _inv(x), exclude=[e1])
        c = _coef(S, e1)
        if _coef(S, e2) != c:
            raise ValueError("cap surgery: loops must be oriented alike")
        S.merge_vertices(S.edges[e1][0], S.edges[e2][0])
        P = S.edges[e1][0]
        d = S.add_edge(P, P, ())
        S.add_triangle(e2, d, e1, -c)
        _fill_disc(S, _loop_at_new_vertex(S, d))
    elif op == "conjugate":
        z = lt(grouping["label"])
        _conjugate(S, _boundary_loop_with(S, z), lt(grouping["h"]), lt(grouping["x"]))
    else:
        raise ValueError(f"unknown surgery {op!r}")
    return S


def chi_ratio(S: LabelledSurface) -> Fraction:
    if S.n_S is None or S.n_S < 1:
        raise ValueError("surface carries no admissibility degree n(S)")
    return Fraction(-invariants(S)["chi_minus"], 2 * S.n_S)


def disjoint_union(S: LabelledSurface, T: LabelledSurface) -> LabelledSurface:
    if S.rank != T.rank:
        raise ValueError("alphabet mismatch")
    U = S.copy()
    off_v, off_e = U.n_vertices, len(U.edges)
    U.n_vertices += T.n_vertices
    U.edges += [(t + off_v, h + off_v, lab) for t, h, lab in T.edges]
    U.triangles += [(a + off_e, b + off_e, c + off_e, s) for a, b, c, s in T.triangles]
    U.n_S = (S.n_S or 0) + (T.n_S or 0) if (S.n_S or T.n_S) else None
    return U


def surface_for_chain(pair, dec, n: int) -> LabelledSurface:
    """Admissible surface for x_1 + ... + x_m from a decomposition of the
    conjugated product of x_i^n; n(S) = n."""
    rank = dec.target.rank
    S = build_from_decomposition(pair, dec, rank)
    y = dec.target.letters
    e = _boundary_loop_with(S, y)
    terms = dec.terms if dec.terms is not None else [dec.target]
    hs = dec.conjugators if dec.conjugators is not None else [Word((), rank)]
    if len(terms) == 1 and not hs[0]:
        T = S
    else:
        T = split_boundary(S, {"op": "split", "edge": e, "label": y,
                               "pieces": [t.letters for t in terms],
                               "conjugators": [h.letters for h in hs]})
    T.n_S = n
    return T
