"""Instance files: a graph, a generator table, closure seeds and defaults (UTF-8 JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath

from ssact.action import ActionTable, ClosureSet, Word, closure, table_to_list, validate_action
from ssact.graph import DEFAULT_MAX_DEPTH, DirectedMultigraph, graph_to_dict, validate_graph


@dataclass
class Instance:
    graph: DirectedMultigraph
    table: ActionTable
    seeds: list[Word]
    defaults: dict = field(default_factory=dict)
    description: str = ""

    def closure(self, extra: list[Word] = (), bound: int | None = None) -> ClosureSet:
        return closure(self.table, list(self.seeds) + list(extra), bound)

    def to_dict(self) -> dict:
        out = {
            "graph": graph_to_dict(self.graph),
            "generators": table_to_list(self.table),
            "seeds": [str(w) for w in self.seeds],
        }
        if self.description:
            out["description"] = self.description
        if self.defaults:
            out["defaults"] = dict(self.defaults)
        return out


def parse_instance(raw: dict, depth: int | None = None) -> Instance:
    """Validate a decoded instance; raises ``GraphError`` or ``ActionError`` listing every problem."""
    defaults = dict(raw.get("defaults", {}))
    graph = validate_graph(raw.get("graph", {}), int(defaults.get("max_depth", DEFAULT_MAX_DEPTH)))
    kwargs = {} if depth is None else {"depth": depth}
    table = validate_action(graph, raw.get("generators", []), **kwargs)
    seed_text = raw.get("seeds")
    if seed_text is None:
        seed_text = list(table.generators)
    seeds = [table.parse_word(s) for s in seed_text]
    return Instance(graph, table, seeds, defaults, raw.get("description", ""))


def load_instance(path, depth: int | None = None) -> Instance:
    """Load from a file path, or from a bundled corpus name such as ``"odometer"``."""
    p = FsPath(path)
    if not p.exists() and str(path) in corpus_names():
        return load_corpus(str(path), depth)
    with open(p, encoding="utf-8") as f:
        return parse_instance(json.load(f), depth)


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(inst.to_dict(), f, indent=2)
        f.write("\n")


def corpus_names() -> list[str]:
    root = resources.files("ssact") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_corpus(name: str, depth: int | None = None) -> Instance:
    text = (resources.files("ssact") / "corpus" / f"{name}.json").read_text(encoding="utf-8")
    return parse_instance(json.loads(text), depth)
