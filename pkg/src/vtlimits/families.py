"""Named graph families and their comparison maps into limit models."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import LabeledGraph, random_regular_graph, read_vtg
from .groups import (DEFAULT_BUDGET, CyclicPower, Dihedral, GroupSpec, Heisenberg, build_cayley,
                     make_genset, standard_genset)

FAMILY_NAMES = ("cyclic", "torus-k", "shifted-base-k", "heisenberg", "dihedral",
                "random-3-regular", "custom-cayley")


class NoComparisonMap(ValueError):
    pass


def parse_gens(text: str | None) -> tuple[tuple[int, ...], ...] | None:
    """``"1,3"`` -> ((1,), (3,)); ``"1:0,0:1"`` -> ((1, 0), (0, 1))."""
    if not text:
        return None
    try:
        return tuple(tuple(int(x) for x in item.split(":")) for item in text.split(","))
    except ValueError:
        raise ValueError(f"bad generator list {text!r}") from None


@dataclass(frozen=True)
class FamilySpec:
    name: str
    k: int = 1
    gens: tuple[tuple[int, ...], ...] | None = None
    seed: int = 0
    path: str | None = None

    @classmethod
    def parse(cls, text: str, gens: str | None = None, seed: int = 0) -> FamilySpec:
        base, _, arg = text.partition(":")
        if base == "custom-cayley":
            if not arg:
                raise ValueError("custom-cayley needs a file: custom-cayley:<path>")
            return cls("custom-cayley", path=arg, seed=seed)
        for prefix in ("torus-", "shifted-base-"):
            if base.startswith(prefix):
                try:
                    k = int(base[len(prefix):])
                except ValueError:
                    raise ValueError(f"bad family {text!r}") from None
                if k < 1:
                    raise ValueError("k must be >= 1")
                return cls(prefix.rstrip("-"), k, parse_gens(gens), seed)
        if base not in ("cyclic", "heisenberg", "dihedral", "random-3-regular"):
            raise ValueError(f"unknown family {text!r}; choose from {', '.join(FAMILY_NAMES)}")
        return cls(base, 1, parse_gens(gens), seed)

    @property
    def label(self) -> str:
        if self.name in ("torus", "shifted-base"):
            return f"{self.name}-{self.k}"
        return self.name

    @property
    def model_dim(self) -> int | None:
        if self.name == "cyclic":
            return 1
        if self.name in ("torus", "shifted-base"):
            return self.k
        if self.name == "heisenberg":
            return 2
        return None

    def group(self, n: int) -> GroupSpec | None:
        if self.name == "cyclic":
            return CyclicPower(n, 1)
        if self.name == "torus":
            return CyclicPower(n, self.k)
        if self.name == "shifted-base":
            return CyclicPower(n ** self.k, 1)
        if self.name == "heisenberg":
            return Heisenberg(n)
        if self.name == "dihedral":
            return Dihedral(n)
        return None

    def genset(self, n: int):
        spec = self.group(n)
        if spec is None:
            return None
        if self.gens is not None:
            elems = []
            for g in self.gens:
                if len(g) != len(spec.identity):
                    raise ValueError(f"generator {g} has wrong length for {spec}")
                elems.append(tuple(x % (n if not isinstance(spec, CyclicPower) else spec.n)
                                   for x in g))
            return make_genset(spec, elems, warn=False)
        if self.name == "shifted-base":
            return make_genset(spec, [(n ** i,) for i in range(self.k)], warn=False)
        return standard_genset(spec)

    def graph(self, n: int, budget: int = DEFAULT_BUDGET) -> LabeledGraph:
        return _graph(self, n, budget)

    def coordinates(self, n: int, graph: LabeledGraph) -> np.ndarray:
        """Image of each vertex in the fundamental domain ``[0,1)^m``."""
        if self.gens is not None and self.name != "cyclic" and self.name != "torus":
            raise NoComparisonMap(f"no comparison map for {self.label} with custom generators")
        labels = graph.labels
        if self.name in ("cyclic", "torus"):
            return np.array(labels, dtype=float) / n
        if self.name == "shifted-base":
            x = np.array([lab[0] for lab in labels], dtype=np.int64)
            digits = [(x // n ** i) % n for i in range(self.k)]
            return np.stack(digits, axis=1).astype(float) / n
        if self.name == "heisenberg":
            return np.array([(lab[0], lab[1]) for lab in labels], dtype=float) / n
        raise NoComparisonMap(f"family {self.label} has no comparison map")


@lru_cache(maxsize=32)
def _graph(family: FamilySpec, n: int, budget: int) -> LabeledGraph:
    if family.name == "random-3-regular":
        return random_regular_graph(3, n, seed=family.seed)
    if family.name == "custom-cayley":
        return read_vtg(family.path)
    spec = family.group(n)
    return build_cayley(spec, family.genset(n), budget)
