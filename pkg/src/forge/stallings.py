"""Subgroup graphs over finite base graphs: Stallings folding, cores,
fibre products and the malnormality certifiers.

A subgroup of the fundamental group of a finite labeled base graph is
represented by an immersion of a finite core graph into the base.  Edge
labels of the domain are edge ids of the base.  All operations are pure;
outputs are canonically relabeled so equal subgroups give byte-identical
graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (BaseMismatchError, ConfigurationError, DegenerateInputError,
                     InvalidActionError, NotALoopError)


class LabeledGraph:
    """Finite directed graph; edges carry a label (a base-graph edge id).

    For a base graph the label of every edge is its own id; a rose is a
    base graph with a single vertex.
    """

    def __init__(self, vertices, edges, basepoint=None):
        self.vertices = tuple(sorted(set(vertices), key=_id_key))
        self.edges = dict(edges)  # eid -> (src, dst, label)
        for eid, (src, dst, label) in self.edges.items():
            if src not in set(self.vertices) or dst not in set(self.vertices):
                raise ConfigurationError(f"edge {eid!r} has an endpoint outside the graph")
        if basepoint is not None and basepoint not in set(self.vertices):
            raise ConfigurationError(f"basepoint {basepoint!r} is not a vertex")
        self.basepoint = basepoint

    def __eq__(self, other):
        return (isinstance(other, LabeledGraph)
                and self.vertices == other.vertices
                and self.edges == other.edges
                and self.basepoint == other.basepoint)

    def __repr__(self):
        return (f"LabeledGraph(V={len(self.vertices)}, E={len(self.edges)}, "
                f"basepoint={self.basepoint!r})")

    def degree(self, v):
        d = 0
        for src, dst, _ in self.edges.values():
            d += (src == v) + (dst == v)
        return d

    def components(self):
        """Vertex sets of the connected components, in canonical order."""
        parent = {v: v for v in self.vertices}
        for src, dst, _ in self.edges.values():
            _union(parent, src, dst)
        comps = {}
        for v in self.vertices:
            comps.setdefault(_find(parent, v), []).append(v)
        return sorted((sorted(vs, key=_id_key) for vs in comps.values()),
                      key=lambda vs: _id_key(vs[0]))


def _id_key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v)) \
        if not isinstance(v, tuple) else (2, 0, tuple(_id_key(x) for x in v))


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _union(parent, x, y):
    rx, ry = _find(parent, x), _find(parent, y)
    if rx != ry:
        if _id_key(ry) < _id_key(rx):
            rx, ry = ry, rx
        parent[ry] = rx


def rose(labels, basepoint="*"):
    """Base graph with one vertex and one loop per label."""
    edges = {label: (basepoint, basepoint, label) for label in labels}
    return LabeledGraph([basepoint], edges, basepoint)


class GraphImmersion:
    """A label-preserving map of a finite graph into a base graph.

    `vmap` sends domain vertices to base vertices; the edge map is implied
    by the labels.  With `folded=True` the immersion condition (no two
    equally-labeled edges leaving or entering a common vertex) is enforced.
    """

    def __init__(self, domain, base, vmap, folded=True):
        self.domain = domain
        self.base = base
        self.vmap = dict(vmap)
        for v in domain.vertices:
            if v not in self.vmap or self.vmap[v] not in set(base.vertices):
                raise ConfigurationError(f"vertex {v!r} is not mapped into the base")
        for eid, (src, dst, label) in domain.edges.items():
            if label not in base.edges:
                raise ConfigurationError(f"edge {eid!r} carries unknown label {label!r}")
            bsrc, bdst, _ = base.edges[label]
            if self.vmap[src] != bsrc or self.vmap[dst] != bdst:
                raise ConfigurationError(
                    f"edge {eid!r} is not label-consistent with the base")
        if domain.basepoint is not None and base.basepoint is not None:
            if self.vmap[domain.basepoint] != base.basepoint:
                raise ConfigurationError("basepoints do not correspond under the map")
        if folded and _violation(domain) is not None:
            raise ConfigurationError("graph is not an immersion; fold it first")
        self.folded = folded

    def __eq__(self, other):
        return (isinstance(other, GraphImmersion)
                and self.domain == other.domain
                and self.base == other.base
                and self.vmap == other.vmap)

    def __repr__(self):
        return f"GraphImmersion({self.domain!r} -> {self.base!r})"


def _violation(graph):
    """First (vertex, direction, edge pair) violating the immersion condition,
    scanning vertices then labels then edge ids in canonical order."""
    out = {}
    inc = {}
    for eid in sorted(graph.edges, key=_id_key):
        src, dst, label = graph.edges[eid]
        out.setdefault((src, label), []).append(eid)
        inc.setdefault((dst, label), []).append(eid)
    for v in graph.vertices:
        for (u, label), eids in sorted(out.items(), key=lambda kv: _id_key(kv[0][1])):
            if u == v and len(eids) > 1:
                return eids[0], eids[1]
        for (u, label), eids in sorted(inc.items(), key=lambda kv: _id_key(kv[0][1])):
            if u == v and len(eids) > 1:
                return eids[0], eids[1]
    return None


def fold(morphism):
    """Fold a label-preserving graph map to an immersion.

    Repeatedly identifies the far endpoints of equally-labeled edge pairs
    leaving (or entering) a common vertex, lowest edge id first.  Folding
    is confluent, so the result is independent of the order up to the
    canonical relabeling applied at the end.
    """
    graph, vmap = morphism.domain, dict(morphism.vmap)
    vertices = list(graph.vertices)
    edges = dict(graph.edges)
    parent = {v: v for v in vertices}
    while True:
        current = _quotient_graph(vertices, edges, parent, graph.basepoint)
        pair = _violation(current)
        if pair is None:
            break
        e1, e2 = pair
        s1, d1, _ = current.edges[e1]
        s2, d2, _ = current.edges[e2]
        # The two edges share one endpoint and a label; identify the others.
        _union(parent, s1, s2)
        _union(parent, d1, d2)
        del edges[e2]
    folded = _quotient_graph(vertices, edges, parent, graph.basepoint)
    new_vmap = {v: vmap[_any_preimage(parent, vmap, v)] for v in folded.vertices}
    return canonical_form(GraphImmersion(folded, morphism.base, new_vmap))


def _any_preimage(parent, vmap, rep):
    # All vertices merged into `rep` share a base image, so any one will do.
    return rep


def _quotient_graph(vertices, edges, parent, basepoint):
    vs = sorted({_find(parent, v) for v in vertices}, key=_id_key)
    es = {}
    seen = {}
    for eid in sorted(edges, key=_id_key):
        src, dst, label = edges[eid]
        key = (_find(parent, src), _find(parent, dst), label)
        if key in seen:
            continue
        seen[key] = eid
        es[eid] = key
    bp = _find(parent, basepoint) if basepoint is not None else None
    return LabeledGraph(vs, es, bp)


def canonical_form(immersion):
    """Relabel vertices by BFS order from the basepoint (then least vertex
    for any remaining components) and edges in (src, label) order."""
    graph = immersion.domain
    order = []
    seen = set()
    adjacency = {}
    for eid in sorted(graph.edges, key=_id_key):
        src, dst, label = graph.edges[eid]
        adjacency.setdefault(src, []).append((label, 0, dst))
        adjacency.setdefault(dst, []).append((label, 1, src))
    starts = []
    if graph.basepoint is not None:
        starts.append(graph.basepoint)
    starts.extend(graph.vertices)
    for start in starts:
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for _, _, u in sorted(adjacency.get(v, [])):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    rename = {v: i for i, v in enumerate(order)}
    edge_items = sorted(
        ((rename[src], label, rename[dst]) for src, dst, label in graph.edges.values()),
        key=lambda t: (t[0], _id_key(t[1]), t[2]))
    edges = {i: (src, dst, label) for i, (src, label, dst) in enumerate(edge_items)}
    bp = rename[graph.basepoint] if graph.basepoint is not None else None
    domain = LabeledGraph(range(len(order)), edges, bp)
    vmap = {rename[v]: immersion.vmap[v] for v in graph.vertices}
    return GraphImmersion(domain, immersion.base, vmap, folded=immersion.folded)


def _trace_in_base(base, word):
    """Base path of a word starting at the base basepoint; raises if the word
    is not readable or not a loop."""
    if base.basepoint is None:
        raise ConfigurationError("base graph has no basepoint")
    at = base.basepoint
    path = [at]
    for label, sign in word.letters:
        if label not in base.edges:
            raise NotALoopError(f"word uses unknown base edge {label!r}")
        src, dst, _ = base.edges[label]
        if sign > 0:
            if src != at:
                raise NotALoopError(f"edge {label!r} is not readable at {at!r}")
            at = dst
        else:
            if dst != at:
                raise NotALoopError(f"edge {label!r} is not readable backwards at {at!r}")
            at = src
        path.append(at)
    if at != base.basepoint:
        raise NotALoopError("word does not close up at the basepoint")
    return path


def graph_of_subgroup(base, generators):
    """Core immersion of the subgroup generated by loop words at the basepoint.

    Builds a wedge of subdivided circles, folds, and trims the core at the
    basepoint.  Folding is confluent so the output is the canonical core
    graph of the subgroup.
    """
    vertices = ["*"]
    edges = {}
    vmap = {"*": base.basepoint}
    for k, word in enumerate(generators):
        path = _trace_in_base(base, word)
        chain = ["*"] + [("w", k, i) for i in range(1, len(word.letters))] + ["*"]
        for i, (label, sign) in enumerate(word.letters):
            u, v = chain[i], chain[i + 1]
            if sign < 0:
                u, v = v, u
            edges[("e", k, i)] = (u, v, label)
        for i, v in enumerate(chain[:-1]):
            vertices.append(v)
            vmap[v] = path[i]
    wedge = GraphImmersion(LabeledGraph(set(vertices), edges, "*"), base, vmap,
                           folded=False)
    return core(fold(wedge))


def core(immersion):
    """Trim degree-1 vertices repeatedly, keeping the basepoint even when it
    has degree 1 so membership stays evaluable."""
    graph = immersion.domain
    vertices = set(graph.vertices)
    edges = dict(graph.edges)
    while True:
        removable = [v for v in sorted(vertices, key=_id_key)
                     if v != graph.basepoint
                     and sum((src == v) + (dst == v)
                             for src, dst, _ in edges.values()) <= 1]
        if not removable:
            break
        for v in removable:
            vertices.discard(v)
            edges = {eid: e for eid, e in edges.items() if v not in (e[0], e[1])}
    trimmed = LabeledGraph(vertices, edges, graph.basepoint)
    vmap = {v: immersion.vmap[v] for v in trimmed.vertices}
    return canonical_form(GraphImmersion(trimmed, immersion.base, vmap,
                                         folded=immersion.folded))


def rank(graph):
    """E - V + 1 for each connected component, keyed by least vertex."""
    comps = graph.components()
    out = {}
    for vs in comps:
        vset = set(vs)
        e = sum(1 for src, dst, _ in graph.edges.values() if src in vset)
        out[vs[0]] = e - len(vs) + 1
    return out


def total_rank(graph):
    """Rank of a connected graph."""
    ranks = rank(graph)
    if len(ranks) != 1:
        raise ConfigurationError("total_rank requires a connected graph")
    return next(iter(ranks.values()))


def membership(immersion, word):
    """True iff the word traces a closed loop at the domain basepoint."""
    _trace_in_base(immersion.base, word)
    graph = immersion.domain
    if graph.basepoint is None:
        raise ConfigurationError("domain graph has no basepoint")
    out = {}
    inc = {}
    for eid, (src, dst, label) in graph.edges.items():
        out[(src, label)] = dst
        inc[(dst, label)] = src
    at = graph.basepoint
    for label, sign in word.letters:
        nxt = out.get((at, label)) if sign > 0 else inc.get((at, label))
        if nxt is None:
            return False
        at = nxt
    return at == graph.basepoint


@dataclass(frozen=True)
class FibreProductComponent:
    index: int
    vertices: tuple
    edge_count: int
    rank: int
    is_tree: bool
    is_diagonal: bool


@dataclass(frozen=True)
class FibreProductDecomposition:
    total: LabeledGraph
    components: tuple
    projection_1: dict = field(compare=False)
    projection_2: dict = field(compare=False)

    def off_diagonal_non_trees(self):
        return [c for c in self.components if not c.is_tree and not c.is_diagonal]


def fibre_product(i1, i2):
    """The pullback {(y1, y2) : i1(y1) = i2(y2)} with its component data.

    Components are numbered by least vertex pair; the diagonal component is
    flagged only when both factors are the same immersion.
    """
    if i1.base != i2.base:
        raise BaseMismatchError("fibre product requires a common base graph")
    same = i1 == i2
    vertices = [(v1, v2) for v1 in i1.domain.vertices for v2 in i2.domain.vertices
                if i1.vmap[v1] == i2.vmap[v2]]
    edges = {}
    for e1 in sorted(i1.domain.edges, key=_id_key):
        s1, d1, l1 = i1.domain.edges[e1]
        for e2 in sorted(i2.domain.edges, key=_id_key):
            s2, d2, l2 = i2.domain.edges[e2]
            if l1 == l2:
                edges[(e1, e2)] = ((s1, s2), (d1, d2), l1)
    bp = None
    if i1.domain.basepoint is not None and i2.domain.basepoint is not None:
        bp = (i1.domain.basepoint, i2.domain.basepoint)
        if bp not in set(vertices):
            bp = None
    total = LabeledGraph(vertices, edges, bp)
    ranks = rank(total)
    comps = []
    for idx, vs in enumerate(total.components()):
        vset = set(vs)
        e = sum(1 for src, _, _ in total.edges.values() if src in vset)
        r = ranks[vs[0]]
        diagonal = same and any(a == b for a, b in vs)
        comps.append(FibreProductComponent(
            index=idx, vertices=tuple(vs), edge_count=e, rank=r,
            is_tree=(r == 0), is_diagonal=diagonal))
    pr1 = {v: v[0] for v in total.vertices}
    pr2 = {v: v[1] for v in total.vertices}
    return FibreProductDecomposition(total, tuple(comps), pr1, pr2)


@dataclass(frozen=True)
class MalnormalityWitness:
    """A non-tree off-diagonal component of some pairwise fibre product."""

    pair: tuple
    component: FibreProductComponent


def malnormal_family_check(family):
    """Certify that a family of subgroups (given as immersions over a common
    base) is malnormal: every component of every pairwise fibre product must
    be a tree, except the diagonal component of each self product.

    Returns (True, None) or (False, witness)."""
    family = list(family)
    for i in range(len(family)):
        for j in range(i, len(family)):
            fp = fibre_product(family[i], family[j])
            for comp in fp.components:
                if comp.is_tree:
                    continue
                if i == j and comp.is_diagonal:
                    continue
                return False, MalnormalityWitness(pair=(i, j), component=comp)
    return True, None


class RelabelingAction:
    """A finite group acting on a base graph by label-graph automorphisms.

    Elements are pairs (vertex permutation, edge-id permutation); the action
    table must be closed and contain the identity.
    """

    def __init__(self, base, elements):
        self.base = base
        self.elements = [(dict(vp), dict(ep)) for vp, ep in elements]
        for vp, ep in self.elements:
            _check_automorphism(base, vp, ep)
        keys = {self._key(el) for el in self.elements}
        ident = (dict.fromkeys(base.vertices), {e: e for e in base.edges})
        for v in base.vertices:
            ident[0][v] = v
        if self._key(ident) not in keys:
            raise InvalidActionError("action table does not contain the identity")
        for el1 in self.elements:
            for el2 in self.elements:
                if self._key(self.compose(el1, el2)) not in keys:
                    raise InvalidActionError("action table is not closed under composition")

    @staticmethod
    def _key(el):
        vp, ep = el
        return (tuple(sorted(vp.items(), key=lambda kv: _id_key(kv[0]))),
                tuple(sorted(ep.items(), key=lambda kv: _id_key(kv[0]))))

    @staticmethod
    def compose(el1, el2):
        """el1 after el2."""
        vp1, ep1 = el1
        vp2, ep2 = el2
        return ({v: vp1[vp2[v]] for v in vp2}, {e: ep1[ep2[e]] for e in ep2})

    @classmethod
    def cyclic(cls, base, edge_image, vertex_image=None):
        """The cyclic group generated by one automorphism."""
        if vertex_image is None:
            vertex_image = {v: v for v in base.vertices}
        elements = []
        vp = {v: v for v in base.vertices}
        ep = {e: e for e in base.edges}
        while True:
            elements.append((dict(vp), dict(ep)))
            vp = {v: vertex_image[vp[v]] for v in vp}
            ep = {e: edge_image[ep[e]] for e in ep}
            if all(vp[v] == v for v in vp) and all(ep[e] == e for e in ep):
                break
        return cls(base, elements)


def _check_automorphism(base, vp, ep):
    if sorted(map(_id_key, vp.values())) != sorted(map(_id_key, base.vertices)) \
            or set(vp) != set(base.vertices):
        raise InvalidActionError("vertex map is not a permutation of the base vertices")
    if sorted(map(_id_key, ep.values())) != sorted(map(_id_key, base.edges)) \
            or set(ep) != set(base.edges):
        raise InvalidActionError("edge map is not a permutation of the base edges")
    for eid, (src, dst, _) in base.edges.items():
        isrc, idst, _ = base.edges[ep[eid]]
        if isrc != vp[src] or idst != vp[dst]:
            raise InvalidActionError(
                f"edge {eid!r} is not mapped compatibly with the vertex map")


def translate(immersion, element):
    """Push an immersion through a base automorphism."""
    vp, ep = element
    graph = immersion.domain
    edges = {eid: (src, dst, ep[label]) for eid, (src, dst, label) in graph.edges.items()}
    vmap = {v: vp[immersion.vmap[v]] for v in graph.vertices}
    base = immersion.base
    basepoint = graph.basepoint
    # A vertex-moving automorphism may carry the basepoint fibre elsewhere;
    # the translated copy is then an unbased subgraph, which is all the
    # malnormality check needs.
    if basepoint is not None and base.basepoint is not None \
            and vmap[basepoint] != base.basepoint:
        basepoint = None
    domain = LabeledGraph(graph.vertices, edges, basepoint)
    return GraphImmersion(domain, base, vmap, folded=immersion.folded)


def translate_family_check(base, action, subgroup, translates):
    """Malnormality certificate for the family of translated copies of a
    subgroup graph (Stallings-side form of the double-coset criterion).

    `translates` are elements of the relabeling action; the check builds one
    translated copy per element and runs malnormal_family_check."""
    keys = {RelabelingAction._key(el) for el in action.elements}
    family = []
    for el in translates:
        el = (dict(el[0]), dict(el[1]))
        if RelabelingAction._key(el) not in keys:
            raise InvalidActionError("translate is not an element of the action")
        family.append(translate(subgroup, el))
    return malnormal_family_check(family)


@dataclass(frozen=True)
class KernelRewriting:
    """Rewriting data for the kernel of the retraction sending the grading
    letter to 1 (mod N) and the emitting letter to 0.

    Convention: the kernel generator e_c is beta^c alpha beta^-c."""

    modulus: int
    alpha: str
    beta: str

    def __post_init__(self):
        if self.modulus < 1:
            raise DegenerateInputError("modulus must be >= 1")
        if self.alpha == self.beta:
            raise DegenerateInputError("alpha and beta must differ")


def kernel_alphabet(rw):
    from .words import Alphabet
    return Alphabet([f"e{i}" for i in range(rw.modulus)])


def rewrite_to_kernel(rw, word):
    """Rewrite a word over {alpha, beta} into the kernel generators e_0..e_{N-1}.

    Scans the word keeping the running beta-exponent c mod N; each alpha^+-
    emits e_c^+-.  Returns the e-word, or None when the total beta-exponent
    is nonzero mod N (the element lies outside the kernel)."""
    from .words import reduce as reduce_word
    target = kernel_alphabet(rw)
    c = 0
    letters = []
    for name, sign in word.letters:
        if name == rw.beta:
            c += sign
        elif name == rw.alpha:
            letters.append((f"e{c % rw.modulus}", sign))
        else:
            raise DegenerateInputError(
                f"kernel rewriting expects letters {rw.alpha!r}/{rw.beta!r}, got {name!r}")
    if c % rw.modulus:
        return None
    return reduce_word(target, letters)
