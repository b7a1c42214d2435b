"""Activity growth: how many level-n sections of an element are nontrivial."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from .wreath import Element, Machine, minimize


@dataclass
class ActivityProfile:
    counts: list[int]
    classification: str  # "bounded" | "polynomial" | "exponential"
    degree: int | None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"counts": self.counts, "class": self.classification, "degree": self.degree, "evidence": self.evidence}


def _machine(g) -> Machine:
    return minimize(g).machine if isinstance(g, Element) else g


def activity_counts(g: Element | Machine, levels: int) -> list[int]:
    """theta(1..levels): number of words u of length n with g|_u nontrivial."""
    if levels < 1:
        raise ValueError("need at least one level")
    m = _machine(g)
    ident = m.identity_state
    vec = {} if ident == 0 else {0: 1}
    out = []
    for _ in range(levels):
        nxt: dict[int, int] = {}
        for s, c in vec.items():
            for t in m.succs[s]:
                if t != ident:
                    nxt[t] = nxt.get(t, 0) + c
        vec = nxt
        out.append(sum(vec.values()))
    return out


def _sccs(nodes: list[int], edges: dict[int, list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = edges[v]
            if i < len(succ):
                work.append((v, i + 1))
                w = succ[i]
                if w not in index:
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def classify_activity(g: Element | Machine, levels: int = 10) -> ActivityProfile:
    """Classify by the strongly connected components of the nontrivial-state graph.

    A component with more internal edges than states carries two distinct
    cycles and gives exponential growth.  Otherwise every cyclic component
    is a single cycle and the growth is polynomial of degree one less than
    the largest number of cycles met along a path; degree 0 is bounded.
    """
    m = _machine(g)
    ident = m.identity_state
    counts = activity_counts(m, levels)
    if ident == 0:
        return ActivityProfile(counts, "bounded", 0, {"cycles": 0, "components": 0})
    # states reachable from the root through nontrivial states
    reach = [0]
    seen = {0}
    for s in reach:
        for t in m.succs[s]:
            if t != ident and t not in seen:
                seen.add(t)
                reach.append(t)
    edges = {s: [t for t in m.succs[s] if t != ident] for s in reach}
    comps = _sccs(reach, edges)
    comp_of = {s: i for i, c in enumerate(comps) for s in c}
    internal = [0] * len(comps)
    for s in reach:
        for t in edges[s]:
            if comp_of[t] == comp_of[s]:
                internal[comp_of[s]] += 1
    cyclic = [internal[i] >= len(c) and internal[i] > 0 for i, c in enumerate(comps)]
    evidence = {
        "components": len(comps),
        "cycles": sum(cyclic),
        "component_sizes": [len(c) for c in comps],
        "internal_edges": internal,
    }
    if any(internal[i] > len(c) for i, c in enumerate(comps)):
        return ActivityProfile(counts, "exponential", None, evidence)
    # Tarjan emits components in reverse topological order, so successors come first
    best = [0] * len(comps)
    for i, c in enumerate(comps):
        down = 0
        for s in c:
            for t in edges[s]:
                j = comp_of[t]
                if j != i:
                    down = max(down, best[j])
        best[i] = down + (1 if cyclic[i] else 0)
    chain = best[comp_of[0]]
    evidence["longest_cycle_chain"] = chain
    degree = max(chain - 1, 0)
    return ActivityProfile(counts, "bounded" if degree == 0 else "polynomial", degree, evidence)


def fitted_exponent(counts: list[int]) -> float | None:
    """Slope of log(theta) against log(n) over the second half of the counts."""
    pts = [(math.log(n), math.log(c)) for n, c in enumerate(counts, start=1) if c > 0 and n > len(counts) // 2]
    if len(pts) < 2:
        return None
    return statistics.linear_regression([x for x, _ in pts], [y for _, y in pts]).slope


def growth_consistent(profile: ActivityProfile) -> bool:
    """The empirical counts agree with the structural class."""
    c = profile.counts
    if profile.classification == "exponential":
        return len(c) >= 4 and c[-1] >= 2 * c[-4] and c[-1] > c[-2]
    if profile.degree == 0:
        half = len(c) // 2
        return not c[half:] or max(c[half:]) <= max(c[:half] or [0])
    slope = fitted_exponent(c)
    return slope is not None and abs(slope - profile.degree) < 0.5
