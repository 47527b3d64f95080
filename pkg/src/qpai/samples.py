"""Labeled samples, their prefix-closed view, file I/O and dataset generators.

Labels are booleans (``True`` for ``+``); the "don't know" label of padded
prefixes is ``None``.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .automata import Alphabet, AutomatonError, Dfa, Word, minimize


class SampleError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    """Ordered, duplicate-free list of ``(word, label)`` pairs."""

    entries: tuple[tuple[Word, bool], ...]
    alphabet: Alphabet

    def __post_init__(self):
        k = len(self.alphabet)
        seen: dict[Word, bool] = {}
        entries = []
        for word, label in self.entries:
            word = tuple(int(a) for a in word)
            label = bool(label)
            for a in word:
                if not 0 <= a < k:
                    raise SampleError(f"symbol index {a} outside alphabet of size {k}")
            if word in seen:
                if seen[word] != label:
                    raise SampleError(f"word {self.alphabet.decode(word)!r} has conflicting labels")
                continue
            seen[word] = label
            entries.append((word, label))
        object.__setattr__(self, "entries", tuple(entries))

    @classmethod
    def from_strings(cls, pairs: Iterable[tuple[str, bool]], alphabet: Alphabet) -> "Sample":
        return cls(tuple((alphabet.encode(w), y) for w, y in pairs), alphabet)

    def __iter__(self) -> Iterator[tuple[Word, bool]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word) -> bool:
        return any(w == tuple(word) for w, _ in self.entries)

    @property
    def words(self) -> list[Word]:
        return [w for w, _ in self.entries]

    @property
    def positives(self) -> list[Word]:
        return [w for w, y in self.entries if y]

    @property
    def negatives(self) -> list[Word]:
        return [w for w, y in self.entries if not y]

    def label_of(self, word: Sequence[int]) -> Optional[bool]:
        word = tuple(word)
        for w, y in self.entries:
            if w == word:
                return y
        return None

    def min_length(self) -> int:
        return min(len(w) for w, _ in self.entries)


def prefix_closure(sample: Sample) -> dict[Word, Optional[bool]]:
    """All prefixes of sample words; words keep their label, padding gets ``None``."""
    view: dict[Word, Optional[bool]] = {}
    for word, _ in sample:
        for i in range(len(word)):
            view.setdefault(word[:i], None)
    for word, label in sample:
        view[word] = label
    return view


# -- file format -----------------------------------------------------------

def load_sample(text: str) -> Sample:
    """Parse the Abbadingo-style format.

    ``N A`` header, optional ``#alphabet a b ...`` line, then one
    ``label len s1 .. slen`` line per word.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise SampleError("empty sample file")
    header = lines[0].split()
    if len(header) != 2:
        raise SampleError(f"malformed header {lines[0]!r}")
    try:
        count, alpha_size = int(header[0]), int(header[1])
    except ValueError:
        raise SampleError(f"malformed header {lines[0]!r}") from None
    if count < 0 or alpha_size < 1:
        raise SampleError(f"malformed header {lines[0]!r}")

    body = lines[1:]
    alphabet = Alphabet.of_size(alpha_size)
    if body and body[0].startswith("#alphabet"):
        symbols = body[0].split()[1:]
        if len(symbols) != alpha_size:
            raise SampleError(f"alphabet line lists {len(symbols)} symbols, header says {alpha_size}")
        try:
            alphabet = Alphabet(tuple(symbols))
        except AutomatonError as exc:
            raise SampleError(str(exc)) from None
        body = body[1:]
    if len(body) != count:
        raise SampleError(f"header announces {count} words, found {len(body)}")

    entries = []
    for ln in body:
        fields = ln.split()
        if len(fields) < 2 or fields[0] not in ("0", "1"):
            raise SampleError(f"malformed line {ln!r}")
        try:
            length = int(fields[1])
        except ValueError:
            raise SampleError(f"malformed line {ln!r}") from None
        if len(fields) - 2 != length:
            raise SampleError(f"line {ln!r} declares length {length}, has {len(fields) - 2} symbols")
        word = []
        for tok in fields[2:]:
            try:
                word.append(alphabet.index(tok))
            except AutomatonError:
                raise SampleError(f"unknown symbol {tok!r} in line {ln!r}") from None
        entries.append((tuple(word), fields[0] == "1"))
    return Sample(tuple(entries), alphabet)


def save_sample(sample: Sample) -> str:
    alphabet = sample.alphabet
    lines = [f"{len(sample)} {len(alphabet)}"]
    if alphabet != Alphabet.of_size(len(alphabet)):
        lines.append("#alphabet " + " ".join(alphabet.symbols))
    for word, label in sample:
        syms = " ".join(alphabet.symbol(a) for a in word)
        lines.append(f"{int(label)} {len(word)} {syms}".rstrip())
    return "\n".join(lines) + "\n"


def read_sample(path) -> Sample:
    with open(path, encoding="utf-8") as f:
        return load_sample(f.read())


def write_sample(sample: Sample, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(save_sample(sample))


# -- Tomita targets --------------------------------------------------------

# delta rows are indexed by symbol: column 0 reads "0", column 1 reads "1"
_TOMITA = {
    # 1*
    1: (((1, 0), (1, 1)), {0}, 1),
    # (10)*
    2: (((2, 1), (0, 2), (2, 2)), {0}, 2),
    # no odd run of 1s followed later by an odd run of 0s
    3: (((0, 1), (2, 0), (3, 4), (2, 3), (4, 4)), {0, 1, 3}, 4),
    # no 000
    4: (((1, 0), (2, 0), (3, 0), (3, 3)), {0, 1, 2}, 3),
    # even number of 0s and even number of 1s
    5: (((1, 2), (0, 3), (3, 0), (2, 1)), {0}, None),
    # (#0 - #1) = 0 mod 3
    6: (((1, 2), (2, 0), (0, 1)), {0}, None),
    # 0*1*0*1*
    7: (((0, 1), (2, 1), (2, 3), (4, 3), (4, 4)), {0, 1, 2, 3}, 4),
}


def tomita(k: int) -> Dfa:
    """Minimal DFA of the ``k``-th Tomita language over ``{0, 1}``."""
    if k not in _TOMITA:
        raise SampleError(f"Tomita grammar index must be in 1..7, got {k!r}")
    delta, accepting, sink = _TOMITA[k]
    return Dfa(delta, accepting, sink=sink)


# -- generators ------------------------------------------------------------

def label_with(dfa: Dfa, words: Iterable[Sequence[int]], alphabet: Optional[Alphabet] = None) -> Sample:
    if alphabet is None:
        alphabet = Alphabet.of_size(dfa.n_symbols)
    seen = set()
    entries = []
    for w in words:
        w = tuple(w)
        if w not in seen:
            seen.add(w)
            entries.append((w, dfa.accepts(w)))
    return Sample(tuple(entries), alphabet)


def _access_strings(dfa: Dfa) -> dict[int, Word]:
    access = {0: ()}
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for a in range(dfa.n_symbols):
            t = dfa.delta[s][a]
            if t not in access:
                access[t] = access[s] + (a,)
                queue.append(t)
    return access


def _distinguishing_suffix(dfa: Dfa, p: int, q: int) -> Optional[Word]:
    start = (p, q)
    parent = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        if (pair[0] in dfa.accepting) != (pair[1] in dfa.accepting):
            suffix = []
            while parent[pair] is not None:
                pair, a = parent[pair]
                suffix.append(a)
            return tuple(reversed(suffix))
        for a in range(dfa.n_symbols):
            nxt = (dfa.delta[pair[0]][a], dfa.delta[pair[1]][a])
            if nxt not in parent:
                parent[nxt] = (pair, a)
                queue.append(nxt)
    return None


def _accepting_suffixes(dfa: Dfa) -> dict[int, Word]:
    """Shortest accepted continuation from each live state."""
    best = {s: () for s in dfa.accepting}
    frontier = list(best)
    while frontier:
        nxt = []
        for s in range(dfa.n_states):
            if s in best:
                continue
            for a in range(dfa.n_symbols):
                t = dfa.delta[s][a]
                if t in best and t in frontier:
                    best[s] = (a,) + best[t]
                    nxt.append(s)
                    break
        frontier = nxt
    return best


def _shortlex(word: Word) -> tuple[int, Word]:
    return len(word), word


def gen_characteristic(target: Dfa, alphabet: Optional[Alphabet] = None) -> Sample:
    """Access strings, their one-letter extensions and distinguishing suffixes.

    Every prefix ``u`` in ``access ∪ access·Σ`` is combined with every suffix
    in ``{ε} ∪ {shortest distinguishing suffix of each state pair}``; when the
    state reached by ``u`` can still accept, ``u`` followed by its shortest
    accepted continuation is added as well so every live transition is
    exercised by a positive word.  Words come out in shortlex order.
    """
    dfa = minimize(target)
    access = _access_strings(dfa)
    states = sorted(access)
    suffixes = {()}
    for i, p in enumerate(states):
        for q in states[i + 1:]:
            e = _distinguishing_suffix(dfa, p, q)
            if e is not None:
                suffixes.add(e)
    accept_from = _accepting_suffixes(dfa)

    prefixes = set()
    for s in states:
        u = access[s]
        prefixes.add(u)
        for a in range(dfa.n_symbols):
            prefixes.add(u + (a,))
    words = set()
    for u in prefixes:
        for e in suffixes:
            words.add(u + e)
        s = dfa.step(0, u)
        if s in accept_from:
            words.add(u + accept_from[s])
    return label_with(dfa, sorted(words, key=_shortlex), alphabet)


def count_words(n_symbols: int, max_len: int) -> int:
    return sum(n_symbols ** i for i in range(max_len + 1))


def gen_random(
    target: Dfa,
    count: int,
    max_len: int,
    seed: int,
    alphabet: Optional[Alphabet] = None,
    exclude: Iterable[Sequence[int]] = (),
) -> Sample:
    """``count`` distinct random words labeled by ``target``.

    Lengths are uniform on ``[0, max_len]``, symbols uniform.  Words in
    ``exclude`` are never drawn (used to keep test sets disjoint from
    training sets).  Deterministic for a given seed.
    """
    if count < 0 or max_len < 0:
        raise SampleError("count and max_len must be non-negative")
    k = target.n_symbols
    excluded = {tuple(w) for w in exclude}
    available = count_words(k, max_len) - sum(1 for w in excluded if len(w) <= max_len)
    if count > available:
        raise SampleError(
            f"cannot draw {count} distinct words of length <= {max_len}; only {available} exist")
    rng = random.Random(seed)
    seen: set[Word] = set()
    words: list[Word] = []
    budget = 100 * count + 1000
    while len(words) < count:
        if budget == 0:
            raise SampleError(f"gave up drawing {count} distinct words after too many duplicates")
        budget -= 1
        length = rng.randint(0, max_len)
        w = tuple(rng.randrange(k) for _ in range(length))
        if w in seen or w in excluded:
            continue
        seen.add(w)
        words.append(w)
    return label_with(target, words, alphabet)
