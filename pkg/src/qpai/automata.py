"""Deterministic finite automata over dense integer states and symbols.

States are ``0..n_states-1`` with the initial state fixed at ``0``; symbols are
indices into an :class:`Alphabet`.  Transition tables are stored row-major as
``delta[state][symbol]``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

Word = tuple[int, ...]


class AutomatonError(ValueError):
    """Raised on malformed automata or inputs outside an automaton's alphabet."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if len(set(symbols)) != len(symbols):
            raise AutomatonError(f"duplicate symbols in alphabet {symbols!r}")
        for s in symbols:
            if not s or any(c.isspace() for c in s):
                raise AutomatonError(f"symbol {s!r} must be a non-empty printable token")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @classmethod
    def of_size(cls, n: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(n)))

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise AutomatonError(f"unknown symbol {symbol!r}") from None

    def symbol(self, i: int) -> str:
        return self.symbols[i]

    def encode(self, text: Iterable[str]) -> Word:
        """Map a string (one character per symbol) or token sequence to indices."""
        return tuple(self.index(c) for c in text)

    def decode(self, word: Sequence[int]) -> str:
        if all(len(s) == 1 for s in self.symbols):
            return "".join(self.symbols[i] for i in word)
        return " ".join(self.symbols[i] for i in word)


@dataclass(frozen=True)
class Dfa:
    """Total DFA ``<S, 0, delta, S+>`` with an optional designated sink state."""

    delta: tuple[tuple[int, ...], ...]
    accepting: frozenset[int]
    sink: Optional[int] = None

    def __post_init__(self):
        delta = tuple(tuple(int(t) for t in row) for row in self.delta)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        n = len(delta)
        if n == 0:
            raise AutomatonError("a DFA needs at least one state")
        k = len(delta[0])
        for s, row in enumerate(delta):
            if len(row) != k:
                raise AutomatonError(f"state {s} has {len(row)} transitions, expected {k}")
            for t in row:
                if not 0 <= t < n:
                    raise AutomatonError(f"transition from {s} targets unknown state {t}")
        if not all(0 <= s < n for s in self.accepting):
            raise AutomatonError("accepting set contains unknown states")
        if self.sink is not None:
            if not 0 <= self.sink < n:
                raise AutomatonError(f"sink {self.sink} is not a state")
            if any(t != self.sink for t in delta[self.sink]):
                raise AutomatonError("sink state must loop on every symbol")
            if self.sink in self.accepting:
                raise AutomatonError("sink state must be rejecting")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def n_symbols(self) -> int:
        return len(self.delta[0])

    initial = 0

    def __len__(self) -> int:
        return self.n_states

    def step(self, state: int, word: Sequence[int]) -> int:
        delta = self.delta
        k = self.n_symbols
        for a in word:
            if not 0 <= a < k:
                raise AutomatonError(f"symbol index {a} outside alphabet of size {k}")
            state = delta[state][a]
        return state

    def accepts(self, word: Sequence[int]) -> bool:
        return self.step(0, word) in self.accepting

    __call__ = accepts

    @classmethod
    def universal(cls, n_symbols: int) -> "Dfa":
        return cls(((0,) * n_symbols,), {0})

    @classmethod
    def empty(cls, n_symbols: int) -> "Dfa":
        return cls(((0,) * n_symbols,), set())


def run(dfa: Dfa, word: Sequence[int]) -> bool:
    """Classify ``word``: ``True`` for accepted (+), ``False`` for rejected (-)."""
    return dfa.accepts(word)


def complete_with_sink(
    states: Iterable[int],
    initial: int,
    delta: Mapping[tuple[int, int], int],
    accepting: Iterable[int],
    n_symbols: int,
    sink: Optional[int] = None,
) -> Dfa:
    """Totalize a partial automaton by routing undefined moves to a sink.

    ``states`` may be any set of integer ids containing ``initial``; ids are
    renumbered densely in sorted order after moving ``initial`` to ``0``, and
    the sink becomes the last state.  A fresh sink is always added unless
    ``sink`` names one already present, in which case it is reused (this keeps
    the operation idempotent).
    """
    states = set(states)
    states.add(initial)
    accepting = set(accepting)
    if not accepting <= states:
        raise AutomatonError("accepting states must be a subset of states")
    for (s, a), t in delta.items():
        if s not in states or t not in states:
            raise AutomatonError(f"transition ({s}, {a}) -> {t} leaves the state set")
        if not 0 <= a < n_symbols:
            raise AutomatonError(f"symbol index {a} outside alphabet of size {n_symbols}")
    if sink is not None and sink not in states:
        raise AutomatonError(f"sink {sink} is not a state")

    order = [initial] + sorted(s for s in states if s != initial and s != sink)
    renum = {s: i for i, s in enumerate(order)}
    sink_id = len(order)
    if sink is not None:
        renum[sink] = sink_id

    rows = []
    for s in order:
        rows.append(tuple(renum[delta[(s, a)]] if (s, a) in delta else sink_id
                          for a in range(n_symbols)))
    rows.append((sink_id,) * n_symbols)
    return Dfa(tuple(rows), {renum[s] for s in accepting}, sink=sink_id)


def complete(dfa: Dfa) -> Dfa:
    """``complete_with_sink`` applied to an existing DFA."""
    delta = {(s, a): t for s, row in enumerate(dfa.delta) for a, t in enumerate(row)
             if s != dfa.sink}
    return complete_with_sink(range(dfa.n_states), 0, delta, dfa.accepting,
                              dfa.n_symbols, sink=dfa.sink)


def is_conforming(dfa: Dfa, sample) -> bool:
    """True iff ``dfa`` accepts every positive and rejects every negative word."""
    if len(sample.alphabet) != dfa.n_symbols:
        raise AutomatonError(
            f"sample alphabet has {len(sample.alphabet)} symbols, DFA has {dfa.n_symbols}")
    return all(dfa.accepts(w) == y for w, y in sample)


def reachable(dfa: Dfa) -> list[int]:
    """States reachable from the initial state, in BFS order."""
    seen = {0}
    order = [0]
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for t in dfa.delta[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def equivalent(a: Dfa, b: Dfa) -> tuple[bool, Optional[Word]]:
    """Decide ``L(a) == L(b)``.

    Returns ``(True, None)`` or ``(False, w)`` with ``w`` a shortest word on
    which the two disagree (BFS over the product, lower symbol index first).
    """
    if a.n_symbols != b.n_symbols:
        raise AutomatonError("automata are over different alphabets")
    start = (0, 0)
    parent: dict[tuple[int, int], Optional[tuple[tuple[int, int], int]]] = {start: None}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if (p[0] in a.accepting) != (p[1] in b.accepting):
            word = []
            while parent[p] is not None:
                p, sym = parent[p]
                word.append(sym)
            return False, tuple(reversed(word))
        for sym in range(a.n_symbols):
            q = (a.delta[p[0]][sym], b.delta[p[1]][sym])
            if q not in parent:
                parent[q] = (p, sym)
                queue.append(q)
    return True, None


def minimize(dfa: Dfa) -> Dfa:
    """Minimal equivalent DFA by Moore-style partition refinement.

    Unreachable states are dropped first.  Blocks are numbered in BFS order
    from the initial block, so the output is canonical.  A rejecting state
    that loops on every symbol is kept as the designated sink.
    """
    live = reachable(dfa)
    k = dfa.n_symbols
    block = {s: int(s in dfa.accepting) for s in live}
    n_blocks = len(set(block.values()))
    while True:
        signature = {s: (block[s],) + tuple(block[dfa.delta[s][a]] for a in range(k))
                     for s in live}
        ids: dict[tuple, int] = {}
        new_block = {s: ids.setdefault(signature[s], len(ids)) for s in live}
        block = new_block
        if len(ids) == n_blocks:
            break
        n_blocks = len(ids)

    rep: dict[int, int] = {}
    for s in live:
        rep.setdefault(block[s], s)
    order = [block[0]]
    seen = {block[0]}
    queue = deque([block[0]])
    while queue:
        b = queue.popleft()
        for a in range(k):
            c = block[dfa.delta[rep[b]][a]]
            if c not in seen:
                seen.add(c)
                order.append(c)
                queue.append(c)
    renum = {b: i for i, b in enumerate(order)}
    rows = tuple(tuple(renum[block[dfa.delta[rep[b]][a]]] for a in range(k)) for b in order)
    accepting = {renum[b] for b in order if rep[b] in dfa.accepting}
    sink = None
    for i, row in enumerate(rows):
        if i not in accepting and all(t == i for t in row):
            sink = i
            break
    return Dfa(rows, accepting, sink=sink)


def to_dot(dfa: Dfa, alphabet: Optional[Alphabet] = None, name: str = "dfa") -> str:
    """Render as a Graphviz digraph, one edge line per transition.

    The initial state is drawn with a heavy outline rather than a start arrow.
    """
    if alphabet is None:
        alphabet = Alphabet.of_size(dfa.n_symbols)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in range(dfa.n_states):
        shape = "doublecircle" if s in dfa.accepting else "circle"
        label = "sink" if s == dfa.sink else f"q{s}"
        extra = ", penwidth=2" if s == 0 else ""
        lines.append(f'  {s} [shape={shape}, label="{label}"{extra}];')
    for s, row in enumerate(dfa.delta):
        for a, t in enumerate(row):
            lines.append(f'  {s} -> {t} [label="{alphabet.symbol(a)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dfa_to_dict(dfa: Dfa) -> dict:
    return {
        "n_states": dfa.n_states,
        "n_symbols": dfa.n_symbols,
        "delta": [list(row) for row in dfa.delta],
        "accepting": sorted(dfa.accepting),
        "sink": dfa.sink,
    }


def dfa_from_dict(data: Mapping) -> Dfa:
    try:
        return Dfa(tuple(tuple(row) for row in data["delta"]), data["accepting"], data.get("sink"))
    except (KeyError, TypeError) as exc:
        raise AutomatonError(f"malformed DFA record: {exc}") from None
