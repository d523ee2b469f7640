"""Automaton-presented self-similar groupoid actions on the path space of a graph.

A generator ``g`` maps ``d(g)E^*`` onto ``t(g)E^*``; its table gives, for each
edge ``e`` in ``d(g)E^1``, the image ``g.e`` and the restriction ``g|_e`` as a
word.  Words are written products: the word ``(l1, ..., ln)`` means
``l1 l2 ... ln`` and acts by applying ``ln`` first.  Equality of elements is
decided by their action (the action is assumed faithful), so the closure of a
set of words is computed by exploring restrictions and merging bisimilar words.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ssact import kernels
from ssact.graph import DirectedMultigraph, GraphError, Path, enumerate_paths

DEFAULT_VALIDATION_DEPTH = 4
INVERSE_SUFFIX = "^-1"

Letter = tuple[str, int]


def default_bound() -> int:
    return int(os.environ.get("SSACT_MAX_CLOSURE", "10000"))


class ActionError(ValueError):
    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ClosureBoundError(RuntimeError):
    """Exploration exceeded its bound: not certified finite-state within bound."""


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...]
    domain: str
    terminus: str

    @property
    def is_unit(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        if not self.letters:
            return f"id_{self.domain}"
        return " ".join(n if s > 0 else n + INVERSE_SUFFIX for n, s in self.letters)


def _reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for name, sign in letters:
        if out and out[-1] == (name, -sign):
            out.pop()
        else:
            out.append((name, sign))
    return tuple(out)


def invert(w: Word) -> Word:
    """The inverse word: letters reversed with signs flipped, endpoints exchanged."""
    return Word(tuple((n, -s) for n, s in reversed(w.letters)), w.terminus, w.domain)


@dataclass(frozen=True)
class Generator:
    name: str
    domain: str
    terminus: str
    forward: dict  # edge -> (image edge, restriction Word)
    backward: dict = field(default_factory=dict)  # image edge -> (edge, inverse restriction)


@dataclass(frozen=True)
class ActionTable:
    graph: DirectedMultigraph
    generators: dict  # name -> Generator, in declaration order

    def unit(self, v: str) -> Word:
        return Word((), v, v)

    def letter_ends(self, letter: Letter) -> tuple[str, str]:
        g = self.generators[letter[0]]
        return (g.domain, g.terminus) if letter[1] > 0 else (g.terminus, g.domain)

    def word(self, letters: Iterable[Letter], vertex: str | None = None) -> Word:
        """Build a reduced word, checking that consecutive letters compose."""
        letters = tuple(letters)
        for name, _ in letters:
            if name not in self.generators:
                raise ActionError([f"unknown generator {name!r}"])
        for a, b in zip(letters, letters[1:]):
            if self.letter_ends(a)[0] != self.letter_ends(b)[1]:
                raise ActionError([f"letters {a} and {b} are not composable"])
        if not letters:
            if vertex is None:
                raise ActionError(["unit word needs a vertex"])
            return self.unit(vertex)
        dom = self.letter_ends(letters[-1])[0]
        ter = self.letter_ends(letters[0])[1]
        if vertex is not None and vertex != dom:
            raise ActionError([f"word has domain {dom!r}, not {vertex!r}"])
        red = _reduce(letters)
        if not red:
            return self.unit(dom)
        return Word(red, dom, ter)

    def parse_word(self, text: str | Sequence[str], vertex: str | None = None) -> Word:
        """Parse ``"a b^-1"`` (or a list of signed names); ``id_v`` / ``id`` denote units."""
        tokens = text.replace("*", " ").replace(",", " ").split() if isinstance(text, str) else list(text)
        letters = []
        for tok in tokens:
            if tok == "id" or (tok.startswith("id_") and tok[3:] in self.graph.vertices and tok not in self.generators):
                v = tok[3:] if tok != "id" else vertex
                if v is None:
                    if self.graph.num_vertices != 1:
                        raise ActionError(["'id' is ambiguous on a graph with several vertices"])
                    v = self.graph.vertices[0]
                vertex = v
                continue
            if tok.endswith(INVERSE_SUFFIX):
                letters.append((tok[: -len(INVERSE_SUFFIX)], -1))
            else:
                letters.append((tok, 1))
        if not letters and vertex is None and self.graph.num_vertices == 1:
            vertex = self.graph.vertices[0]
        return self.word(letters, vertex if not letters else None)

    def letter_step(self, letter: Letter, e: str) -> tuple[str, Word]:
        g = self.generators[letter[0]]
        table = g.forward if letter[1] > 0 else g.backward
        try:
            return table[e]
        except KeyError:
            raise ActionError([f"letter {letter} does not act on edge {e!r}"]) from None

    def step(self, w: Word, e: str) -> tuple[str, Word]:
        """``(w.e, w|_e)`` for a single edge ``e`` with ``r(e) == d(w)``."""
        if self.graph.r(e) != w.domain:
            raise ActionError([f"edge {e!r} does not start at d(w) = {w.domain!r}"])
        if not w.letters:
            return e, self.unit(self.graph.s(e))
        cur = e
        parts = []
        for letter in reversed(w.letters):
            cur, r = self.letter_step(letter, cur)
            parts.append(r.letters)
        letters = _reduce(l for part in reversed(parts) for l in part)
        s_in, s_out = self.graph.s(e), self.graph.s(cur)
        if not letters:
            return cur, self.unit(s_in)
        return cur, Word(letters, s_in, s_out)


def _split_signed(name: str) -> Letter:
    if name.endswith(INVERSE_SUFFIX):
        return name[: -len(INVERSE_SUFFIX)], -1
    return name, 1


def validate_action(graph: DirectedMultigraph, raw: Sequence[dict],
                    depth: int = DEFAULT_VALIDATION_DEPTH) -> ActionTable:
    """Check a generator table against the graph and return an :class:`ActionTable`.

    Structural checks (endpoints, bijectivity on edges, restriction endpoints)
    come first; if they pass, the self-similarity identity and bijectivity are
    checked on all paths up to ``depth``.
    """
    errors: list[str] = []
    specs = {}
    for item in raw:
        name = str(item.get("name", ""))
        if not name or name.endswith(INVERSE_SUFFIX):
            errors.append(f"invalid generator name {name!r}")
            continue
        if name in specs:
            errors.append(f"duplicate label: generator {name!r}")
            continue
        specs[name] = item
    ends = {}
    for name, item in specs.items():
        d, t = str(item.get("domain")), str(item.get("terminus"))
        for role, v in (("domain", d), ("terminus", t)):
            if v not in graph.vertices:
                errors.append(f"dangling endpoint: generator {name!r} has undeclared {role} {v!r}")
        ends[name] = (d, t)
    if errors:
        raise ActionError(errors)

    def letter_ends(letter):
        d, t = ends[letter[0]]
        return (d, t) if letter[1] > 0 else (t, d)

    generators = {}
    for name, item in specs.items():
        d, t = ends[name]
        trans = item.get("transitions", {}) or {}
        expected = graph.out_edges(d)
        missing = [e for e in expected if e not in trans]
        extra = [e for e in trans if e not in expected]
        if missing:
            errors.append(f"generator {name!r}: no transition for edges {missing}")
        if extra:
            errors.append(f"endpoint mismatch: generator {name!r} has transitions for {extra} outside d(g)E^1")
        if len(graph.out_edges(t)) != len(expected):
            errors.append(f"non-bijective edge action: |{d}E^1| != |{t}E^1| for generator {name!r}")
        forward = {}
        images = []
        for e in expected:
            if e not in trans:
                continue
            entry = trans[e]
            out = str(entry.get("out"))
            if not graph.has_edge(out):
                errors.append(f"generator {name!r}: unknown output edge {out!r} for {e!r}")
                continue
            if graph.r(out) != t:
                errors.append(f"endpoint mismatch: {name}.{e} = {out!r} does not start at t(g) = {t!r}")
            images.append(out)
            letters = [_split_signed(str(x)) for x in entry.get("restriction", [])]
            unknown = [n for n, _ in letters if n not in ends]
            if unknown:
                errors.append(f"generator {name!r}: restriction at {e!r} uses unknown generators {unknown}")
                continue
            s_in, s_out = graph.s(e), graph.s(out)
            bad = False
            for a, b in zip(letters, letters[1:]):
                if letter_ends(a)[0] != letter_ends(b)[1]:
                    errors.append(f"restriction-word with wrong d/t: {name}|_{e} letters do not compose")
                    bad = True
            if not bad:
                if letters:
                    rd, rt = letter_ends(letters[-1])[0], letter_ends(letters[0])[1]
                else:
                    rd = rt = s_in
                if (rd, rt) != (s_in, s_out):
                    errors.append(
                        f"restriction-word with wrong d/t: {name}|_{e} has (d, t) = ({rd}, {rt}), "
                        f"expected ({s_in}, {s_out})"
                    )
            red = _reduce(letters)
            forward[e] = (out, Word(red, s_in, s_out) if red else Word((), s_in, s_in))
        if len(set(images)) != len(images):
            errors.append(f"non-bijective edge action: generator {name!r} sends two edges to the same edge")
        generators[name] = Generator(name, d, t, forward)
    if errors:
        raise ActionError(errors)

    for g in generators.values():
        for e, (out, r) in g.forward.items():
            g.backward[out] = (e, invert(r))
    table = ActionTable(graph, generators)
    problems = check_self_similarity(table, depth)
    if problems:
        raise ActionError(problems)
    return table


def check_self_similarity(table: ActionTable, depth: int) -> list[str]:
    """Check bijectivity, length preservation and the restriction identity up to ``depth``."""
    graph = table.graph
    problems = []
    for g in table.generators.values():
        for sign in (1, -1):
            w = table.word([(g.name, sign)])
            for k in range(1, depth + 1):
                paths = enumerate_paths(graph, w.domain, k)
                images = [act(table, w, mu) for mu in paths]
                if len(set(images)) != len(images) or len(images) != len(enumerate_paths(graph, w.terminus, k)):
                    problems.append(f"non-bijective edge action: {w} on paths of length {k}")
                for mu, img in zip(paths, images):
                    if len(img) != k or img.range != w.terminus:
                        problems.append(f"{w} maps {mu} to {img}, wrong length or range")
                    for cut in range(1, k):
                        head = graph.path(mu.edges[:cut])
                        tail = graph.path(mu.edges[cut:])
                        left = act(table, w, head)
                        right = act(table, restrict(table, w, head), tail)
                        if graph.concat(left, right) != img:
                            problems.append(f"restriction identity fails for {w} at {head}|{tail}")
            if problems:
                return problems
    return problems


def act(table: ActionTable, w: Word, mu: Path) -> Path:
    """``w . mu``, edge by edge via ``g.(e nu) = (g.e)(g|_e . nu)``."""
    if mu.range != w.domain:
        raise ActionError([f"d(w) = {w.domain!r} but path starts at {mu.range!r}"])
    if not mu.edges:
        return table.graph.empty_path(w.terminus)
    out = []
    cur = w
    for e in mu.edges:
        image, cur = table.step(cur, e)
        out.append(image)
    return table.graph.path(out)


def restrict(table: ActionTable, w: Word, mu: Path) -> Word:
    """``w|_mu``, with domain ``s(mu)`` and terminus ``s(w . mu)``."""
    if mu.range != w.domain:
        raise ActionError([f"d(w) = {w.domain!r} but path starts at {mu.range!r}"])
    cur = w
    for e in mu.edges:
        _, cur = table.step(cur, e)
    return cur


def _key(w: Word):
    return (w.letters, w.domain)


def is_trivial(table: ActionTable, w: Word, bound: int | None = None) -> bool:
    """True iff every restriction of ``w`` fixes every edge it acts on.

    Coinductive: fixing all edges at every reachable restriction fixes every path.
    """
    if w.domain != w.terminus:
        raise ActionError([f"{w} has d != t, so it cannot be a unit"])
    bound = default_bound() if bound is None else bound
    seen = {_key(w)}
    queue = deque([w])
    while queue:
        x = queue.popleft()
        if not x.letters:
            continue
        for e in table.graph.out_edges(x.domain):
            out, r = table.step(x, e)
            if out != e:
                return False
            k = _key(r)
            if k not in seen:
                seen.add(k)
                if len(seen) > bound:
                    raise ClosureBoundError(f"triviality of {w} not certified within bound {bound}")
                queue.append(r)
    return True


@dataclass
class ClosureSet:
    """Restriction- and inverse-closed set of element classes.

    Class ``i`` has representative ``reps[i]`` and key ``keys[i]``; for each edge
    index ``j``, ``out_edge[i, j]`` is the image edge index and ``restr[i, j]``
    the class of the restriction (both -1 when the edge is not in ``d(i)E^1``).
    """

    table: ActionTable
    reps: list[Word]
    out_edge: np.ndarray
    restr: np.ndarray
    inverse: list[int]
    word_class: dict
    M: np.ndarray = field(init=False)

    def __post_init__(self):
        self.keys = [str(w) for w in self.reps]
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.domain = [w.domain for w in self.reps]
        self.terminus = [w.terminus for w in self.reps]
        self.unit_of = {}
        for i, w in enumerate(self.reps):
            if w.is_unit:
                self.unit_of[w.domain] = i
        self.M = restriction_matrix(self)

    @property
    def graph(self) -> DirectedMultigraph:
        return self.table.graph

    def __len__(self) -> int:
        return len(self.reps)

    def is_unit(self, i: int) -> bool:
        return self.reps[i].is_unit

    @property
    def unit_indices(self) -> list[int]:
        """Unit classes in vertex declaration order."""
        return [self.unit_of[v] for v in self.graph.vertices]

    @property
    def loop_mask(self) -> np.ndarray:
        """True for classes with ``d == t``."""
        return np.array([d == t for d, t in zip(self.domain, self.terminus)])

    def class_of(self, item) -> int:
        """Class index for an index, key string or :class:`Word`; ``KeyError`` if absent."""
        if isinstance(item, (int, np.integer)):
            return int(item)
        if isinstance(item, str):
            if item in self.index:
                return self.index[item]
            item = self.table.parse_word(item)
        found = self.find(item)
        if found is None:
            raise KeyError(f"{item} is not in the closure")
        return found

    def find(self, w: Word, bound: int | None = None) -> int | None:
        """Class of ``w`` if it belongs to the closure, by coinductive matching."""
        k = _key(w)
        if k in self.word_class:
            return self.word_class[k]
        bound = default_bound() if bound is None else bound
        for c in range(len(self)):
            if self.domain[c] == w.domain and self.terminus[c] == w.terminus and self._matches(w, c, bound):
                return c
        return None

    def _matches(self, w: Word, c: int, bound: int) -> bool:
        graph = self.graph
        seen = {(_key(w), c)}
        stack = [(w, c)]
        while stack:
            x, h = stack.pop()
            for e in graph.out_edges(x.domain):
                j = graph.edge_index(e)
                out, r = self.table.step(x, e)
                if graph.edge_index(out) != self.out_edge[h, j]:
                    return False
                pair = (_key(r), int(self.restr[h, j]))
                if pair not in seen:
                    seen.add(pair)
                    if len(seen) > bound:
                        raise ClosureBoundError(f"membership of {w} not certified within bound {bound}")
                    stack.append((r, pair[1]))
        return True

    def kernel_tables(self):
        """Integer arrays in the layout expected by :mod:`ssact.kernels`."""
        graph = self.graph
        ptr = [0]
        vedges = []
        for v in graph.vertices:
            vedges.extend(graph.edge_index(e) for e in graph.out_edges(v))
            ptr.append(len(vedges))
        as_int = lambda a: np.ascontiguousarray(a, dtype=np.int_)  # noqa: E731
        vix = graph.vertex_index
        return (
            as_int(self.out_edge),
            as_int(self.restr),
            as_int([vix(s) for _, _, s in graph.edges]),
            as_int(ptr),
            as_int(vedges),
            as_int([vix(d) for d in self.domain]),
            as_int([vix(t) for t in self.terminus]),
        )

    def fixed_path_census(self, g, depth: int, backend: str | None = None):
        """Brute-force census by enumerating every path from ``d(g)`` up to ``depth``.

        Returns ``(counts, totals)`` as in :func:`ssact._pykernels.fixed_path_census`.
        """
        if depth > self.graph.max_depth:
            raise GraphError([f"depth {depth} exceeds enumeration guard {self.graph.max_depth}"])
        impl = kernels if backend is None else kernels.BACKENDS[backend]
        return impl.fixed_path_census(*self.kernel_tables(), self.class_of(g), depth)


def closure(table: ActionTable, seeds: Sequence[Word], bound: int | None = None) -> ClosureSet:
    """Saturate ``seeds`` under single-edge restriction and inversion, then merge.

    Words are explored breadth-first (seeds first); bisimilar words are merged by
    partition refinement on (endpoints, edge images, restriction classes).
    Every vertex's unit is included.  Classes are numbered by discovery order.
    """
    graph = table.graph
    bound = default_bound() if bound is None else bound
    words: list[Word] = []
    index: dict = {}
    queue: deque = deque()

    def add(w: Word) -> int:
        k = _key(w)
        if k not in index:
            if len(words) >= bound:
                raise ClosureBoundError(f"not certified finite-state within bound {bound}")
            index[k] = len(words)
            words.append(w)
            queue.append(index[k])
        return index[k]

    for w in seeds:
        add(w)
        add(invert(w))
    trans: dict[int, list[tuple[int, int]]] = {}

    def drain():
        while queue:
            i = queue.popleft()
            w = words[i]
            row = []
            for e in graph.out_edges(w.domain):
                out, r = table.step(w, e)
                j = add(r)
                add(invert(r))
                row.append((graph.edge_index(out), j))
            trans[i] = row

    drain()
    for v in graph.vertices:
        add(table.unit(v))
    drain()

    n = len(words)
    sig0 = [(w.domain, w.terminus, tuple(o for o, _ in trans[i])) for i, w in enumerate(words)]
    block = _relabel(sig0)
    while True:
        sig = [(block[i], tuple(block[j] for _, j in trans[i])) for i in range(n)]
        new = _relabel(sig)
        if max(new) == max(block):
            block = new
            break
        block = new

    n_classes = max(block) + 1
    reps: list[Word] = [None] * n_classes  # type: ignore[list-item]
    for i in range(n):
        if reps[block[i]] is None:
            reps[block[i]] = words[i]
    out_edge = -np.ones((n_classes, graph.num_edges), dtype=np.int64)
    restr = -np.ones((n_classes, graph.num_edges), dtype=np.int64)
    for c, w in enumerate(reps):
        i = index[_key(w)]
        for e, (o, j) in zip(graph.out_edges(w.domain), trans[i]):
            out_edge[c, graph.edge_index(e)] = o
            restr[c, graph.edge_index(e)] = block[j]
    inverse = [block[index[_key(invert(w))]] for w in reps]
    word_class = {k: block[i] for k, i in index.items()}
    return ClosureSet(table, reps, out_edge, restr, inverse, word_class)


def _relabel(signatures: list) -> list[int]:
    ids: dict = {}
    return [ids.setdefault(s, len(ids)) for s in signatures]


def restriction_matrix(cl: ClosureSet) -> np.ndarray:
    """``M[g, h]`` counts edges ``e`` in ``d(g)E^1`` with ``g.e == e`` and ``g|_e`` in class ``h``."""
    n = len(cl.reps)
    M = np.zeros((n, n), dtype=np.int64)
    cols = np.arange(cl.out_edge.shape[1])
    for g in range(n):
        fixed = cl.out_edge[g] == cols
        for j in np.nonzero(fixed)[0]:
            M[g, cl.restr[g, j]] += 1
    return M


def lint_faithful(table: ActionTable, depth: int = DEFAULT_VALIDATION_DEPTH) -> list[str]:
    """Bounded-depth faithfulness lint: generators that act alike (or trivially) up to ``depth``."""
    graph = table.graph
    signatures = {}
    warnings = []
    for name, g in table.generators.items():
        w = table.word([(name, 1)])
        sig = (g.domain, g.terminus, tuple(
            tuple(act(table, w, mu).edges for mu in enumerate_paths(graph, g.domain, k))
            for k in range(1, depth + 1)
        ))
        if g.domain == g.terminus:
            ident = tuple(tuple(mu.edges for mu in enumerate_paths(graph, g.domain, k)) for k in range(1, depth + 1))
            if sig[2] == ident:
                warnings.append(f"generator {name!r} acts trivially on paths of length <= {depth}")
        if sig in signatures:
            warnings.append(f"generators {signatures[sig]!r} and {name!r} agree on paths of length <= {depth}")
        signatures.setdefault(sig, name)
    return warnings


def table_to_list(table: ActionTable) -> list[dict]:
    out = []
    for g in table.generators.values():
        trans = {}
        for e, (o, r) in g.forward.items():
            trans[e] = {"out": o, "restriction": [n if s > 0 else n + INVERSE_SUFFIX for n, s in r.letters]}
        out.append({"name": g.name, "domain": g.domain, "terminus": g.terminus, "transitions": trans})
    return out
