"""RPNI: prefix tree acceptor plus red-blue state merging."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .automata import Dfa, Word, complete_with_sink
from .samples import Sample, prefix_closure


@dataclass(frozen=True)
class Pta:
    """Prefix tree acceptor; node ids follow shortlex order of their prefixes."""

    prefixes: tuple[Word, ...]
    children: tuple[dict[int, int], ...]
    labels: tuple[Optional[bool], ...]
    n_symbols: int

    def __len__(self) -> int:
        return len(self.prefixes)


def build_pta(sample: Sample) -> Pta:
    view = prefix_closure(sample)
    view.setdefault((), None)
    prefixes = sorted(view, key=lambda w: (len(w), w))
    ids = {w: i for i, w in enumerate(prefixes)}
    children: list[dict[int, int]] = [{} for _ in prefixes]
    for w, i in ids.items():
        if w:
            children[ids[w[:-1]]][w[-1]] = i
    return Pta(tuple(prefixes), tuple(children), tuple(view[w] for w in prefixes),
               len(sample.alphabet))


class _Quotient:
    """Partition of PTA nodes under union-find, with per-block labels and moves."""

    def __init__(self, pta: Pta):
        n = len(pta)
        self.parent = list(range(n))
        self.label = list(pta.labels)
        self.trans = [dict(c) for c in pta.children]

    def copy(self) -> "_Quotient":
        q = _Quotient.__new__(_Quotient)
        q.parent = self.parent[:]
        q.label = self.label[:]
        q.trans = [dict(t) for t in self.trans]
        return q

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def merge(self, keep: int, gone: int) -> bool:
        """Union two blocks and fold their successors; False on a label clash."""
        pending = [(keep, gone)]
        while pending:
            a, b = pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            la, lb = self.label[a], self.label[b]
            if la is not None and lb is not None and la != lb:
                return False
            self.parent[b] = a
            if la is None:
                self.label[a] = lb
            ta = self.trans[a]
            for sym, child in self.trans[b].items():
                if sym in ta:
                    pending.append((ta[sym], child))
                else:
                    ta[sym] = child
        return True


def rpni(sample: Sample) -> Dfa:
    """Learn a sink-completed DFA conforming to ``sample``.

    Blue states are visited in shortlex order of their PTA prefix; each is
    merged into the earliest red state that keeps the sample consistent,
    or promoted to red.
    """
    pta = build_pta(sample)
    hyp = _Quotient(pta)
    red = [0]
    while True:
        red_set = {hyp.find(r) for r in red}
        blue = sorted({hyp.find(c) for r in red_set for c in hyp.trans[r].values()} - red_set)
        if not blue:
            break
        b = blue[0]
        for r in red:
            trial = hyp.copy()
            if trial.merge(hyp.find(r), b):
                hyp = trial
                break
        else:
            red.append(b)

    states = {hyp.find(r) for r in red}
    delta = {}
    for s in states:
        for sym, child in hyp.trans[s].items():
            delta[(s, sym)] = hyp.find(child)
    accepting = {s for s in states if hyp.label[s] is True}
    return complete_with_sink(states, hyp.find(0), delta, accepting, pta.n_symbols)

