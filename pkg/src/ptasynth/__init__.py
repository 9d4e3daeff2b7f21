"""Parameter synthesis for parametric timed automata.

Exact rational constraints (:mod:`ptasynth.constraints`), a model format
(:mod:`ptasynth.model`), concrete zone-graph semantics
(:mod:`ptasynth.concrete`), parametric zone graphs (:mod:`ptasynth.symbolic`),
trace-preserving synthesis (:mod:`ptasynth.synthesis`) and counter-machine
encodings (:mod:`ptasynth.gadgets`).
"""

from importlib import resources

__version__ = "0.1.0"

from .constraints import Context, DisjunctiveConstraint, Polyhedron  # noqa: E402
from .model import PtaModel, classify, parse, parse_file, render, valuate  # noqa: E402
from .concrete import build_trace_automaton, trace_sets_equal, untimed_language_included  # noqa: E402
from .symbolic import explore  # noqa: E402
from .synthesis import preserve_1c, preserve_lu_1ip, preserve_robust_1c, tps  # noqa: E402


def corpus_path(name: str):
    """Path of a bundled example model, e.g. ``corpus_path("coffee")``."""
    if not name.endswith(".pta"):
        name += ".pta"
    return resources.files(__package__).joinpath("corpus", name)


def load_corpus(name: str) -> PtaModel:
    return parse(corpus_path(name).read_text())


__all__ = [
    "Context",
    "Polyhedron",
    "DisjunctiveConstraint",
    "PtaModel",
    "parse",
    "parse_file",
    "render",
    "classify",
    "valuate",
    "build_trace_automaton",
    "trace_sets_equal",
    "untimed_language_included",
    "explore",
    "tps",
    "preserve_1c",
    "preserve_robust_1c",
    "preserve_lu_1ip",
    "corpus_path",
    "load_corpus",
]
