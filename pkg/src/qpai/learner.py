"""Q-learning based passive inference of DFAs.

The Q-table is indexed by ``(state, symbol)`` rows and ``(successor, final)``
columns: ``row = s * |Σ| + a`` and ``col = 2 * s' + (0 if final else 1)``.
The greedy policy of the table is read back as a DFA by following positive
sample words; everything off those paths is sent to a sink.
"""
from __future__ import annotations

import logging
import random
import time
from operator import mul
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .automata import Alphabet, Dfa, Word, complete_with_sink, minimize
from .samples import Sample

log = logging.getLogger(__name__)

REPROCESS, NEXT_WORD, DONE = 0, 1, 2


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.1
    gamma: float = 0.9
    eps_min: float = 0.1
    reward: float = 1.0
    episodes: int = 200
    reprocess_bound: int = 25
    seed: int = 0
    bootstrap: str = "row"

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0 <= self.eps_min <= 1:
            raise ValueError(f"eps_min must lie in [0, 1], got {self.eps_min}")
        if not self.reward > 0:
            raise ValueError(f"reward must be positive, got {self.reward}")
        if self.episodes < 1:
            raise ValueError(f"episodes must be positive, got {self.episodes}")
        if self.reprocess_bound < 1:
            raise ValueError(f"reprocess_bound must be positive, got {self.reprocess_bound}")
        if self.bootstrap not in ("row", "successor"):
            raise ValueError(f"bootstrap must be 'row' or 'successor', got {self.bootstrap!r}")


class QTable:
    """Dense ``(n·|Σ|) × (2n)`` table of transition utilities.

    Rows are kept as Python lists: the learner touches one short row at a
    time, where list arithmetic beats numpy's per-call overhead.  ``values``
    gives the whole table as an array.
    """

    def __init__(self, n: int, n_symbols: int, values=None):
        if n < 1 or n_symbols < 1:
            raise ValueError("a Q-table needs at least one state and one symbol")
        self.n = n
        self.n_symbols = n_symbols
        shape = (n * n_symbols, 2 * n)
        if values is None:
            self.rows = [[0.0] * shape[1] for _ in range(shape[0])]
        else:
            arr = np.asarray(values, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"expected shape {shape}, got {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError("Q-values must be finite")
            self.rows = arr.tolist()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), 2 * self.n

    @property
    def values(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def row(self, s: int, a: int) -> int:
        return s * self.n_symbols + a

    @staticmethod
    def col(s2: int, final: bool) -> int:
        return 2 * s2 + (0 if final else 1)

    @staticmethod
    def action(col: int) -> tuple[int, bool]:
        return col // 2, col % 2 == 0

    def __getitem__(self, key) -> float:
        s, a, s2, f = key
        return self.rows[self.row(s, a)][self.col(s2, f)]

    def __setitem__(self, key, value: float) -> None:
        s, a, s2, f = key
        self.rows[self.row(s, a)][self.col(s2, f)] = float(value)

    def greedy(self, r: int) -> int:
        """Best column of row ``r``; the lowest index wins ties."""
        row = self.rows[r]
        return row.index(max(row))

    def policy(self) -> np.ndarray:
        return np.array([row.index(max(row)) for row in self.rows], dtype=np.intp)

    def copy(self) -> "QTable":
        q = QTable.__new__(QTable)
        q.n, q.n_symbols = self.n, self.n_symbols
        q.rows = [row[:] for row in self.rows]
        return q

    def __eq__(self, other) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return (self.n, self.n_symbols, self.rows) == (other.n, other.n_symbols, other.rows)

    def to_csv(self, alphabet: Optional[Alphabet] = None) -> str:
        alphabet = alphabet or Alphabet.of_size(self.n_symbols)
        cols = [f"{s}{'+' if f else '-'}" for s in range(self.n) for f in (True, False)]
        lines = ["s,σ," + ",".join(cols)]
        for s in range(self.n):
            for a in range(self.n_symbols):
                vals = ",".join(repr(v) for v in self.rows[self.row(s, a)])
                lines.append(f"{s},{alphabet.symbol(a)},{vals}")
        return "\n".join(lines) + "\n"


class Step(NamedTuple):
    state: int
    symbol: int
    successor: int
    final: bool


Trajectory = list[Step]


# -- rewards ---------------------------------------------------------------

def reward_from_qtable(y_hat: bool, y: bool, r: float = 1.0) -> float:
    if y_hat == y:
        return 4 * r if y else 2 * r
    return -r / 2


def reward_from_dfa(y_hat: bool, y: bool, r: float = 1.0) -> float:
    if y_hat == y:
        return r if y else 0.0
    return -r / 2


# -- table operations ------------------------------------------------------

def _variance(row: Sequence[float]) -> float:
    # population variance
    n = len(row)
    m = sum(row) / n
    return max(0.0, sum(map(mul, row, row)) / n - m * m)


def explore_or_exploit(q: QTable, s: int, a: int, i: int, rng: random.Random,
                       eps_min: float = 0.1) -> tuple[int, bool]:
    """Variance-adaptive epsilon-greedy choice of ``(successor, final)``.

    ``i`` is the 1-based position of ``a`` in the word.
    """
    r = q.row(s, a)
    row = q.rows[r]
    eps = max(eps_min, min(1.0, i * _variance(row)))
    if rng.random() < eps:
        c = rng.randrange(len(row))
    else:
        c = q.greedy(r)
    return q.action(c)


def update_qtable(q: QTable, tau: Sequence[Step], reward: float, h: Hyperparams) -> QTable:
    """Apply the temporal-difference update to every step of ``tau`` in place.

    With ``h.bootstrap == "row"`` the bootstrap term is the max over the
    updated row itself; ``"successor"`` uses the row of the next step in the
    trajectory (zero after the last step).
    """
    rows = q.rows
    k = q.n_symbols
    alpha, gamma = h.alpha, h.gamma
    last = len(tau) - 1
    for j, (s, a, s2, f) in enumerate(tau):
        row = rows[s * k + a]
        c = 2 * s2 + (0 if f else 1)
        if h.bootstrap == "row":
            future = max(row)
        elif j < last:
            future = max(rows[s2 * k + tau[j + 1].symbol])
        else:
            future = 0.0
        row[c] += alpha * (reward + gamma * future - row[c])
    return q


def dfa_from_q(q: QTable, sample: Sample) -> Dfa:
    """Read the greedy policy of ``q`` back as a sink-completed DFA.

    Transitions are recorded only along positive sample words.  The initial
    state is accepting iff the sample labels the empty word ``+``.
    """
    if len(sample.alphabet) != q.n_symbols:
        raise ValueError("sample alphabet does not match the Q-table")
    if len(sample) == 0:
        return complete_with_sink({0}, 0, {}, (), q.n_symbols)
    return _SampleTrie(sample).extract(q.policy()).dfa


def _count_correct(dfa: Dfa, sample: Sample) -> int:
    return sum(1 for w, y in sample if dfa.accepts(w) == y)


def accuracy(dfa: Dfa, sample: Sample) -> float:
    if len(sample) == 0:
        raise ValueError("accuracy is undefined on an empty sample")
    return _count_correct(dfa, sample) / len(sample)


# -- driver ----------------------------------------------------------------

@dataclass
class RunMetrics:
    n_states: int
    dfa_size: int
    episodes: int
    wall_ms: int
    accuracy: float
    conforming: bool
    attempts: int = 0
    steps: int = 0


class Evaluation(NamedTuple):
    q: QTable
    dfa: Dfa
    chi: int
    q_best: QTable
    dfa_best: Dfa


class _SampleTrie:
    """Sample words folded into a breadth-first numbered prefix tree.

    Nodes of equal depth are contiguous, so following a policy from the root
    is one vectorized gather per level rather than one step per symbol.
    """

    def __init__(self, sample: Sample):
        self.n_symbols = len(sample.alphabet)
        view: dict[Word, int] = {(): 0}
        for w, y in sample:
            for i in range(len(w)):
                view.setdefault(w[:i], 0)
            view[w] = 1 if y else -1
        order = sorted(view, key=lambda w: (len(w), w))
        ids = {w: i for i, w in enumerate(order)}
        self.size = len(order)
        self.label = np.array([view[w] for w in order], dtype=np.int8)
        self.parent = np.array([ids[w[:-1]] if w else 0 for w in order], dtype=np.intp)
        self.symbol = np.array([w[-1] if w else 0 for w in order], dtype=np.intp)
        bounds = np.searchsorted([len(w) for w in order], np.arange(len(order[-1]) + 2))
        self.levels = [(int(bounds[d]), int(bounds[d + 1])) for d in range(1, len(bounds) - 1)]
        # a node lies on a positive path iff some positive word extends it
        on_pos = self.label > 0
        for lo, hi in reversed(self.levels):
            np.logical_or.at(on_pos, self.parent[lo:hi], on_pos[lo:hi])
        self.on_positive = on_pos
        self.pos_nodes = np.flatnonzero(on_pos[1:]) + 1
        self.labeled = self.label != 0
        self.target = self.label > 0
        self.total = int(self.labeled.sum())
        self.accept_empty = bool(self.label[0] > 0)
        self.node_of = ids

    def extract(self, policy: np.ndarray) -> "_Extraction":
        """Follow the greedy ``policy`` and score the resulting automaton."""
        k = self.n_symbols
        succ = policy >> 1
        final = (policy & 1) == 0
        parent, symbol = self.parent, self.symbol
        state = np.zeros(self.size, dtype=np.intp)
        row = np.zeros(self.size, dtype=np.intp)
        for lo, hi in self.levels:
            r = state[parent[lo:hi]] * k + symbol[lo:hi]
            row[lo:hi] = r
            state[lo:hi] = succ[r]

        used = np.unique(row[self.pos_nodes])
        defined = np.zeros(policy.shape[0], dtype=bool)
        defined[used] = True
        is_acc = np.zeros(policy.shape[0] // k * 2, dtype=bool)
        is_acc[succ[used[final[used]]]] = True
        if self.accept_empty:
            is_acc[0] = True

        # nodes whose path leaves the recorded transitions end in the sink
        alive = np.ones(self.size, dtype=bool)
        for lo, hi in self.levels:
            alive[lo:hi] = alive[parent[lo:hi]] & defined[row[lo:hi]]
        predicted = alive & is_acc[state]
        correct = int(np.count_nonzero((predicted == self.target) & self.labeled))
        return _Extraction(k, succ[used], used, np.flatnonzero(is_acc), predicted, correct)


class _Extraction:
    __slots__ = ("k", "succ", "used", "accepting", "predicted", "correct", "_dfa")

    def __init__(self, k, succ, used, accepting, predicted, correct):
        self.k = k
        self.succ = succ
        self.used = used
        self.accepting = accepting
        self.predicted = predicted
        self.correct = correct
        self._dfa: Optional[Dfa] = None

    @property
    def dfa(self) -> Dfa:
        if self._dfa is None:
            k = self.k
            states = {0}
            states.update(self.succ.tolist())
            delta = {(r // k, r % k): t for r, t in zip(self.used.tolist(), self.succ.tolist())}
            self._dfa = complete_with_sink(states, 0, delta, self.accepting.tolist(), k)
        return self._dfa


class _Session:
    """Mutable state of one Q-PAI run over a fixed sample and state budget."""

    def __init__(self, sample: Sample, n: int, h: Hyperparams, rng: random.Random):
        self.sample = sample
        self.h = h
        self.rng = rng
        self.k = len(sample.alphabet)
        self.trie = _SampleTrie(sample)
        self.total = self.trie.total
        self.q = QTable(n, self.k)
        self.policy = self.q.policy().tolist()
        self.q_best = QTable(n, self.k)
        self.current: Optional[_Extraction] = None
        self.dfa_best = complete_with_sink({0}, 0, {}, {0} if self.trie.accept_empty else (), self.k)
        self.best_correct = _count_correct(self.dfa_best, sample)
        self._best: Optional[_Extraction] = None
        self._cache: dict[tuple, _Extraction] = {}

    def set_table(self, q: QTable) -> None:
        self.q = q
        self.policy = q.policy().tolist()

    def extract(self) -> _Extraction:
        key = tuple(self.policy)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.trie.extract(np.array(self.policy, dtype=np.intp))
            if len(self._cache) > 50_000:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def update(self, tau: Trajectory, reward: float) -> None:
        update_qtable(self.q, tau, reward, self.h)
        q = self.q
        k = self.k
        for s, a, _, _ in tau:
            r = s * k + a
            self.policy[r] = q.greedy(r)

    def trajectory(self, word: Word) -> Trajectory:
        rows = self.q.rows
        k = self.k
        width = 2 * self.q.n
        rng = self.rng
        eps_min = self.h.eps_min
        tau = []
        s = 0
        for i, a in enumerate(word, start=1):
            eps = max(eps_min, min(1.0, i * _variance(rows[s * k + a])))
            if rng.random() < eps:
                c = rng.randrange(width)
            else:
                c = self.policy[s * k + a]
            s2 = c >> 1
            tau.append(Step(s, a, s2, not c & 1))
            s = s2
        return tau

    def evaluate(self, tau: Trajectory, word: Word, y: bool) -> int:
        """Reward, update and re-extract for one processed word; returns chi."""
        h = self.h
        node = self.trie.node_of[word]
        if tau:
            y1 = tau[-1].final
            self.update(tau, reward_from_qtable(y1, y, h.reward))
        y2 = bool(self.extract().predicted[node])
        if tau:
            self.update(tau, reward_from_dfa(y2, y, h.reward))
        ex = self.current = self.extract()
        y2 = bool(ex.predicted[node])
        chi = NEXT_WORD if y2 == y else REPROCESS
        if ex.correct == self.total:
            chi = DONE
        if chi == DONE or ex.correct > self.best_correct:
            self.q_best, self._best, self.best_correct = self.q.copy(), ex, ex.correct
            self.dfa_best = ex.dfa
        return chi

    def snapshot(self, chi: int) -> Evaluation:
        return Evaluation(self.q, self.current.dfa, chi, self.q_best, self.dfa_best)


def evaluate_and_update(q: QTable, q_best: QTable, sample: Sample, tau: Sequence[Step],
                        word: Sequence[int], y: bool, h: Hyperparams,
                        dfa_best: Optional[Dfa] = None) -> Evaluation:
    """One reward/update/evaluate round for a processed word.

    ``q`` is updated in place.  ``dfa_best`` defaults to the automaton read
    from ``q_best``.
    """
    sess = _Session(sample, q.n, h, random.Random(0))
    sess.set_table(q)
    sess.q_best = q_best
    sess.dfa_best = dfa_best if dfa_best is not None else dfa_from_q(q_best, sample)
    sess.best_correct = _count_correct(sess.dfa_best, sample)
    chi = sess.evaluate(list(tau), tuple(word), bool(y))
    return sess.snapshot(chi)


def qpai(alphabet: Alphabet, sample: Sample, n: int, h: Hyperparams = Hyperparams(),
         on_evaluate: Optional[Callable[[Word, Evaluation], None]] = None,
         rng: Optional[random.Random] = None) -> tuple[Dfa, RunMetrics]:
    """Learn a DFA with at most ``n`` states (plus sink) conforming to ``sample``.

    Each word is reprocessed while its greedy classification is wrong, but
    processed at most ``h.reprocess_bound`` times per episode.  Stops early
    as soon as an automaton classifies the whole sample correctly.
    """
    if len(sample) == 0:
        raise ValueError("cannot learn from an empty sample")
    if n < 1:
        raise ValueError("state budget must be at least 1")
    if len(alphabet) != len(sample.alphabet):
        raise ValueError("alphabet does not match the sample")
    start = time.perf_counter()
    sess = _Session(sample, n, h, rng if rng is not None else random.Random(h.seed))
    attempts = steps = 0
    episode = 0
    done = sess.best_correct == sess.total
    while not done and episode < h.episodes:
        episode += 1
        for word, y in sample:
            for _ in range(h.reprocess_bound):
                tau = sess.trajectory(word)
                attempts += 1
                steps += len(tau)
                chi = sess.evaluate(tau, word, y)
                if on_evaluate is not None:
                    on_evaluate(word, sess.snapshot(chi))
                if chi != REPROCESS:
                    break
            if chi == DONE:
                done = True
                break
    acc = sess.best_correct / sess.total
    metrics = RunMetrics(
        n_states=n,
        dfa_size=minimize(sess.dfa_best).n_states,
        episodes=episode,
        wall_ms=int((time.perf_counter() - start) * 1000),
        accuracy=acc,
        conforming=sess.best_correct == sess.total,
        attempts=attempts,
        steps=steps,
    )
    log.debug("qpai n=%d: %d episodes, accuracy %.4f", n, episode, acc)
    return sess.dfa_best, metrics


def infer(alphabet: Alphabet, sample: Sample, h: Hyperparams = Hyperparams(),
          max_states: int = 10, init_states: Optional[int] = None) -> tuple[Dfa, RunMetrics]:
    """Run :func:`qpai` with a growing state budget until the result conforms.

    The budget starts at the length of the shortest sample word (at least 1)
    unless ``init_states`` overrides it.  If no budget up to ``max_states``
    yields a conforming automaton, the most accurate one is returned.
    """
    if len(sample) == 0:
        raise ValueError("cannot learn from an empty sample")
    n0 = init_states if init_states is not None else max(1, sample.min_length())
    if n0 < 1:
        raise ValueError("initial state budget must be at least 1")
    if max_states < n0:
        raise ValueError(f"max_states={max_states} is below the initial budget {n0}")
    start = time.perf_counter()
    best: Optional[tuple[Dfa, RunMetrics]] = None
    episodes = attempts = steps = 0
    for n in range(n0, max_states + 1):
        rng = random.Random(h.seed * 1_000_003 + n)
        dfa, m = qpai(alphabet, sample, n, h, rng=rng)
        episodes += m.episodes
        attempts += m.attempts
        steps += m.steps
        if best is None or m.accuracy > best[1].accuracy:
            best = (dfa, m)
        if m.conforming:
            break
    dfa, m = best
    m = replace(m, episodes=episodes, attempts=attempts, steps=steps,
                wall_ms=int((time.perf_counter() - start) * 1000))
    return dfa, m
