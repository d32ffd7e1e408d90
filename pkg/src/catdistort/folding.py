"""Stallings graphs and folding.

A subgroup of a free group is represented by a based, directed, labeled
graph.  Folding repeatedly identifies equally-labeled edges that share an
endpoint until no vertex has two outgoing (or two incoming) edges with the
same label; the folded graph decides membership by path tracing and its
first Betti number is the subgroup rank.

An endomorphism given by positive images of uniform length is certified
injective by folding the rose spelling its images: the image subgroup's
rank equals the domain rank iff no loop was killed, and a surjection
between free groups of the same finite rank is an isomorphism.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidParameterError,
    NotInImageError,
    PairRepetitionError,
)
from .words import PositiveWord, Word, check_pair_uniqueness, free_reduce, invert


class StallingsGraph:
    """Based, directed, edge-labeled graph with per-edge provenance.

    Provenance sets record which (petal, position) pairs of the original
    rose an edge descends from; folds merge them.
    """

    def __init__(self, n_vertices: int, base: int,
                 edges: Sequence[tuple[int, int, int, frozenset]],
                 folded: bool = False):
        self.n_vertices = n_vertices
        self.base = base
        self.edges = tuple(edges)
        self.folded = folded
        self._out: dict[tuple[int, int], tuple[int, int]] | None = None
        self._in: dict[tuple[int, int], tuple[int, int]] | None = None

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def _tables(self):
        if self._out is None:
            out: dict[tuple[int, int], tuple[int, int]] = {}
            inc: dict[tuple[int, int], tuple[int, int]] = {}
            for idx, (u, v, lab, _) in enumerate(self.edges):
                if self.folded and ((u, lab) in out or (v, lab) in inc):
                    raise InvalidInputError("graph marked folded but has a fold pair")
                out[(u, lab)] = (v, idx)
                inc[(v, lab)] = (u, idx)
            self._out, self._in = out, inc
        return self._out, self._in

    def trace(self, word: Sequence[int], start: int | None = None) -> int | None:
        """Endpoint of the path spelling ``word`` from ``start``, or None
        if some letter cannot be read.  Requires a folded graph."""
        if not self.folded:
            raise InvalidInputError("trace requires a folded graph")
        out, inc = self._tables()
        v = self.base if start is None else start
        for x in word:
            hop = out.get((v, x)) if x > 0 else inc.get((v, -x))
            if hop is None:
                return None
            v = hop[0]
        return v

    def is_connected(self) -> bool:
        if self.n_vertices <= 1:
            return True
        nbr: dict[int, list[int]] = {v: [] for v in range(self.n_vertices)}
        for u, v, _, _ in self.edges:
            nbr[u].append(v)
            nbr[v].append(u)
        seen = {self.base}
        stack = [self.base]
        while stack:
            for w in nbr[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    def canonical_form(self) -> tuple:
        """Canonical description of the based labeled graph.

        Folded graphs are deterministic automata, so a BFS from the base
        vertex in (label, direction) order renames vertices canonically;
        two folded graphs are isomorphic as based labeled graphs iff their
        canonical forms are equal.
        """
        if not self.folded:
            raise InvalidInputError("canonical_form requires a folded graph")
        out, inc = self._tables()
        keys: dict[int, list[tuple[int, int]]] = {}
        for (v, lab), (w, _) in out.items():
            keys.setdefault(v, []).append((lab, 1))
        for (v, lab), (w, _) in inc.items():
            keys.setdefault(v, []).append((lab, -1))
        order = {self.base: 0}
        queue = [self.base]
        qi = 0
        while qi < len(queue):
            v = queue[qi]
            qi += 1
            for lab, d in sorted(keys.get(v, [])):
                w = out[(v, lab)][0] if d == 1 else inc[(v, lab)][0]
                if w not in order:
                    order[w] = len(order)
                    queue.append(w)
        canon_edges = sorted(
            (order[u], order[v], lab) for u, v, lab, _ in self.edges
        )
        return (len(order), tuple(canon_edges))

    def to_dot(self, alphabet=None) -> str:
        """Graphviz digraph; edge labels are generator tokens, base vertex
        is shape-marked, provenance shown as tooltips."""
        name = (lambda g: alphabet.gen(g).token) if alphabet is not None else str
        lines = ["digraph stallings {"]
        lines.append(f'  v{self.base} [shape=doublecircle];')
        for u, v, lab, prov in self.edges:
            tip = ",".join(f"{p}:{q}" for p, q in sorted(prov))
            lines.append(
                f'  v{u} -> v{v} [label="{name(lab)}", tooltip="{tip}"];'
            )
        lines.append("}")
        return "\n".join(lines)


def rose_from_words(words: Sequence[Sequence[int]]) -> StallingsGraph:
    """Wedge of subdivided circles at a base vertex, the j-th spelling
    ``words[j]``.  Each edge's provenance is its (petal, position) pair."""
    if len(words) == 0:
        raise InvalidInputError("rose needs at least one word")
    edges = []
    n = 1  # vertex 0 is the base
    for j, w in enumerate(words):
        if len(w) == 0:
            raise InvalidInputError(f"petal {j} is the empty word")
        prev = 0
        for pos, x in enumerate(w):
            nxt = 0 if pos == len(w) - 1 else n
            if pos != len(w) - 1:
                n += 1
            prov = frozenset([(j, pos)])
            if x > 0:
                edges.append((prev, nxt, x, prov))
            else:
                edges.append((nxt, prev, -x, prov))
            prev = nxt
    return StallingsGraph(n, 0, edges, folded=False)


def fold(graph: StallingsGraph, seed: int | None = None) -> StallingsGraph:
    """Fold to the immersion: identify pairs of equally-labeled edges
    sharing an endpoint until none remain.  Operates on a private copy;
    provenance sets merge on identification and the base vertex is tracked.

    The default processing order is a canonical smallest-slot-first queue;
    ``seed`` randomizes it (used by confluence tests only).
    """
    import heapq

    nv = graph.n_vertices
    parent = list(range(nv))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # edge store: eid -> [src, dst, label, provenance, alive]
    edges: list[list] = [
        [u, v, lab, set(prov), True] for u, v, lab, prov in graph.edges
    ]
    adj: list[dict | None] = [dict() for _ in range(nv)]
    for eid, (u, v, lab, _, _) in enumerate(edges):
        adj[u].setdefault((0, lab), set()).add(eid)
        adj[v].setdefault((1, lab), set()).add(eid)

    rng = random.Random(seed) if seed is not None else None
    # worklist of (vertex, direction, label) slots that may hold a fold pair
    work: list[tuple[int, int, int]] = []
    for v in range(nv):
        for (d, lab), s in adj[v].items():
            if len(s) >= 2:
                work.append((v, d, lab))
    if rng is None:
        heapq.heapify(work)

    def pop_slot() -> tuple[int, int, int]:
        if rng is None:
            return heapq.heappop(work)
        i = rng.randrange(len(work))
        work[i], work[-1] = work[-1], work[i]
        return work.pop()

    def push_slot(slot: tuple[int, int, int]) -> None:
        if rng is None:
            heapq.heappush(work, slot)
        else:
            work.append(slot)

    while work:
        v0, d, lab = pop_slot()
        v = find(v0)
        table = adj[v]
        key = (d, lab)
        eids = table.get(key)
        if not eids:
            continue
        alive = sorted(e for e in eids if edges[e][4])
        if len(alive) != len(eids):
            table[key] = set(alive)
        if len(alive) < 2:
            continue
        e1, e2 = alive[0], alive[1]
        u1 = find(edges[e1][1 - d])
        u2 = find(edges[e2][1 - d])
        # merge e2 into e1, pooling provenance
        edges[e2][4] = False
        edges[e1][3] |= edges[e2][3]
        table[key].discard(e2)
        okey = (1 - d, lab)
        t2 = adj[u2]
        if t2 is not None and okey in t2:
            t2[okey].discard(e2)
        if u1 != u2:
            # weighted union; ties keep the smaller id
            a, b = u1, u2
            la, lb = len(adj[a]), len(adj[b])
            if (lb, a) > (la, b):
                a, b = b, a
            parent[b] = a
            ta, tb = adj[a], adj[b]
            for k2, s2 in tb.items():
                if k2 in ta:
                    ta[k2] |= s2
                else:
                    ta[k2] = s2
                if len(ta[k2]) >= 2:
                    push_slot((a,) + k2)
            adj[b] = None
        if len(table[key]) >= 2:
            push_slot((find(v), d, lab))

    # compact the quotient
    alive_edges = [e for e in edges if e[4]]
    remap: dict[int, int] = {}

    def rid(x: int) -> int:
        r = find(x)
        if r not in remap:
            remap[r] = len(remap)
        return remap[r]

    base = rid(graph.base)
    out_edges = []
    for u, v, lab, prov, _ in alive_edges:
        out_edges.append((rid(u), rid(v), lab, frozenset(prov)))
    n_alive = len(remap)
    return StallingsGraph(n_alive, base, out_edges, folded=True)


def rank(graph: StallingsGraph) -> int:
    """First Betti number E - V + 1 of a connected graph."""
    if not graph.is_connected():
        raise InvalidInputError("rank is defined for connected graphs")
    return graph.n_edges - graph.n_vertices + 1


def membership(graph: StallingsGraph, word: Sequence[int]) -> bool:
    """True iff the freely reduced word traces a closed path at the base."""
    w = free_reduce(word)
    return graph.trace(w) == graph.base


# -- positive endomorphisms --------------------------------------------------


class PositiveEndomorphism:
    """A map from a rank-m free group sending the j-th generator to a
    positive word of uniform length L over the codomain alphabet.

    Domain letters are 1..m.  The image family must be free of repeated
    ordered two-letter subwords (checked at construction); this is what
    keeps folding shallow and junction cancellation short.
    """

    def __init__(self, images, domain_alphabet=None, codomain_alphabet=None):
        arr = np.asarray(images, dtype=np.int32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidParameterError(
                "images must form a nonempty rectangular family"
            )
        if arr.min() < 1:
            raise InvalidParameterError("images must be positive words")
        report = check_pair_uniqueness(arr)
        if not report.ok:
            raise PairRepetitionError(
                f"image family repeats ordered pairs: {report.duplicates[:5]}"
            )
        self.images = arr
        self.domain_rank = int(arr.shape[0])
        self.length = int(arr.shape[1])
        self.domain_alphabet = domain_alphabet
        self.codomain_alphabet = codomain_alphabet
        self._rows_cache: list[tuple[int, ...]] | None = None
        self._neg_rows_cache: list[tuple[int, ...]] | None = None
        self._index_cache: tuple[dict, dict] | None = None
        self._graph: StallingsGraph | None = None
        self._certificate: InjectivityCertificate | None = None

    @property
    def _rows(self) -> list[tuple[int, ...]]:
        if self._rows_cache is None:
            self._rows_cache = [tuple(int(x) for x in row) for row in self.images]
        return self._rows_cache

    @property
    def _neg_rows(self) -> list[tuple[int, ...]]:
        if self._neg_rows_cache is None:
            self._neg_rows_cache = [invert(r) for r in self._rows]
        return self._neg_rows_cache

    @property
    def _by_first(self) -> dict[int, tuple[int, ...]]:
        return self._indexes()[0]

    @property
    def _by_last(self) -> dict[int, tuple[int, ...]]:
        return self._indexes()[1]

    def _indexes(self) -> tuple[dict, dict]:
        if self._index_cache is None:
            by_first: dict[int, tuple[int, ...]] = {}
            by_last: dict[int, tuple[int, ...]] = {}
            for j, row in enumerate(self._rows):
                by_first[row[0]] = by_first.get(row[0], ()) + (j,)
                by_last[row[-1]] = by_last.get(row[-1], ()) + (j,)
            self._index_cache = (by_first, by_last)
        return self._index_cache

    # -- image subgroup graph ------------------------------------------

    @property
    def graph(self) -> StallingsGraph:
        """Folded graph of the subgroup generated by the images."""
        if self._graph is None:
            self._graph = fold(rose_from_words(self._rows))
        return self._graph

    def _tree_paths(self) -> list:
        """Reduced word from the base vertex to every vertex of the
        folded graph, along a breadth-first tree in (label, direction)
        order.  Canonical given the folded graph."""
        if getattr(self, "_tree_cache", None) is None:
            g = self.graph
            out, inc = g._tables()
            hops: dict[int, list[tuple[int, int]]] = {}
            for (v, lab), (w, _) in out.items():
                hops.setdefault(v, []).append((lab, w))
            for (v, lab), (w, _) in inc.items():
                hops.setdefault(v, []).append((-lab, w))
            paths: list = [None] * g.n_vertices
            paths[g.base] = ()
            queue = [g.base]
            qi = 0
            while qi < len(queue):
                v = queue[qi]
                qi += 1
                for step, w in sorted(hops.get(v, [])):
                    if paths[w] is None:
                        paths[w] = paths[v] + (step,)
                        queue.append(w)
            self._tree_cache = paths
        return self._tree_cache

    def coset_rep(self, g: Sequence[int]) -> Word:
        """Canonical representative of the left coset (image subgroup)*g.

        The reduced path of g in the Schreier graph of the image subgroup
        runs through the folded core and then out into a hanging tree;
        the coset is determined by (exit vertex, untraceable suffix), and
        the representative is the tree path to the exit vertex followed
        by that suffix.  Empty iff g lies in the image subgroup."""
        w = free_reduce(g)
        graph = self.graph
        out, inc = graph._tables()
        v = graph.base
        i = 0
        while i < len(w):
            x = w[i]
            hop = out.get((v, x)) if x > 0 else inc.get((v, -x))
            if hop is None:
                break
            v = hop[0]
            i += 1
        return self._tree_paths()[v] + w[i:]

    @property
    def certificate(self) -> "InjectivityCertificate":
        if self._certificate is None:
            g = self.graph
            r = rank(g)
            self._certificate = InjectivityCertificate(
                domain_rank=self.domain_rank,
                graph=g,
                folded_rank=r,
                injective=(r == self.domain_rank),
            )
        return self._certificate

    # -- applying -------------------------------------------------------

    def apply(self, word: Sequence[int]) -> Word:
        """Freely reduced image of a word over the domain letters."""
        rows, neg = self._rows, self._neg_rows
        out: list[int] = []
        positive = True
        for x in word:
            if x > 0:
                out.extend(rows[x - 1])
            else:
                positive = False
                out.extend(neg[-x - 1])
        if positive:
            return tuple(out)
        return free_reduce(out)

    def apply_positive_array(self, arr: np.ndarray) -> np.ndarray:
        """Fast path: image of a positive word given as an id array.
        Positive words never cancel, so this is a pure gather."""
        return self.images[np.asarray(arr, dtype=np.int64) - 1].ravel()

    def membership(self, word: Sequence[int]) -> bool:
        return membership(self.graph, word)

    # -- inverting -------------------------------------------------------

    def preimage(self, word: Sequence[int]) -> Word:
        """The unique v with phi(v) = word, for injective phi.

        Parses the word into image chunks with bounded junction
        cancellation; candidates are seeded by the first/last-letter index
        of the image family, with full backtracking as a fallback.
        Raises :class:`NotInImageError` when no parse exists.
        """
        w = free_reduce(word)
        if not w:
            return ()
        if not self.membership(w):
            raise NotInImageError("word does not trace a closed base path")
        L = self.length
        # Phase 1: first-letter-seeded candidates only; complete for L >= 3
        # because junction cancellation cannot reach a chunk's first letter.
        # Later phases admit fully-vanishing chunks (possible at L <= 2)
        # with progressively wider remnant caps.
        phases = [(False, 2 * L + 2, None)]
        if L <= 2:
            phases = [(False, 2 * L + 2, 100_000),
                      (True, 4 * L + 8, 4_000_000),
                      (True, 64 * L, None)]
        for allow_fallback, rem_cap, budget in phases:
            try:
                return self._parse(w, allow_fallback, rem_cap, budget)
            except NotInImageError:
                if (allow_fallback, rem_cap, budget) == phases[-1]:
                    raise
        raise NotInImageError("unreachable")

    def _parse(self, w: Word, allow_fallback: bool, rem_cap: int,
               budget: int | None) -> Word:
        L = self.length
        m = self.domain_rank
        rows = self._rows
        wlen = len(w)

        def step(i: int, rem: tuple, j: int, e: int):
            # strip chunk (row j)^e from the front of rem + w[i:]
            stack = list(self._neg_rows[j]) if e > 0 else list(rows[j])
            p, q = 0, i
            rl = len(rem)
            while stack:
                if p < rl:
                    nxt = rem[p]
                elif q < wlen:
                    nxt = w[q]
                else:
                    break
                if nxt == -stack[-1]:
                    stack.pop()
                    if p < rl:
                        p += 1
                    else:
                        q += 1
                else:
                    break
            new_rem = tuple(stack) + rem[p:]
            return q, new_rem

        def candidates(first: int, prev: tuple | None):
            if first > 0:
                seeded, es = self._by_first.get(first, ()), 1
            else:
                seeded, es = self._by_last.get(-first, ()), -1
            for j in seeded:
                if prev is not None and j == prev[0] and es == -prev[1]:
                    continue  # would make v unreduced
                yield (j, es)
            if allow_fallback:
                seen = set(seeded)
                for j in range(m):
                    for e in (1, -1):
                        if e == es and j in seen:
                            continue
                        if prev is not None and j == prev[0] and e == -prev[1]:
                            continue
                        yield (j, e)

        failed: set = set()
        on_stack: set = set()
        visits = 0
        # iterative DFS: frames of (state, candidate iterator).  Revisiting
        # a state already on the stack cannot help (any completion from the
        # revisit completes from the first visit), so cycles are skipped.
        root = (0, (), None)
        stack_frames = [(root, candidates(w[0], None))]
        on_stack.add(root)
        path: list[int] = []
        while stack_frames:
            (i, rem, prev), it = stack_frames[-1]
            advanced = False
            for j, e in it:
                q, new_rem = step(i, rem, j, e)
                if len(new_rem) > rem_cap:
                    continue
                nxt_state = (q, new_rem, (j, e))
                if nxt_state in failed or nxt_state in on_stack:
                    continue
                visits += 1
                if budget is not None and visits > budget:
                    raise NotInImageError("parse budget exceeded")
                path.append((j + 1) * e)
                if not new_rem and q == wlen:
                    return tuple(path)
                nxt_first = new_rem[0] if new_rem else w[q]
                stack_frames.append((nxt_state, candidates(nxt_first, (j, e))))
                on_stack.add(nxt_state)
                advanced = True
                break
            if not advanced:
                state = stack_frames.pop()[0]
                failed.add(state)
                on_stack.discard(state)
                if path:
                    path.pop()
        raise NotInImageError("no chunk parse despite closed trace")


@dataclass(frozen=True)
class InjectivityCertificate:
    """Folding outcome: injective iff the folded rank equals the domain
    rank (a rank drop certifies a loop killed by some fold)."""

    domain_rank: int
    graph: StallingsGraph
    folded_rank: int
    injective: bool


def certify_injective(phi: PositiveEndomorphism) -> InjectivityCertificate:
    """Fold the rose on phi's images and compare ranks."""
    return phi.certificate


def rewrite_preimage(phi: PositiveEndomorphism, word: Sequence[int]) -> Word:
    """Rewrite an image element back through phi.  Precondition: phi is
    certified injective (so the preimage is unique when it exists)."""
    if not phi.certificate.injective:
        raise InvalidInputError("rewrite_preimage requires an injective map")
    return phi.preimage(word)
