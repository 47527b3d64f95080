"""Passive DFA inference: a Q-learning learner, an RPNI baseline and Tomita benchmarks."""
from .automata import (Alphabet, AutomatonError, Dfa, complete, complete_with_sink, equivalent,
                       is_conforming, minimize, run, to_dot)
from .learner import Hyperparams, QTable, RunMetrics, accuracy, dfa_from_q, infer, qpai
from .rpni import build_pta, rpni
from .samples import (Sample, SampleError, gen_characteristic, gen_random, label_with,
                      load_sample, prefix_closure, save_sample, tomita)

__all__ = [
    "Alphabet", "AutomatonError", "Dfa", "complete", "complete_with_sink", "equivalent",
    "is_conforming", "minimize", "run", "to_dot",
    "Hyperparams", "QTable", "RunMetrics", "accuracy", "dfa_from_q", "infer", "qpai",
    "build_pta", "rpni",
    "Sample", "SampleError", "gen_characteristic", "gen_random", "label_with", "load_sample",
    "prefix_closure", "save_sample", "tomita",
]
