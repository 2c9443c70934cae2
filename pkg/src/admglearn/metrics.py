"""Structure-recovery scores: skeleton, arrowhead, and tail precision/recall/F1.

Skeleton compares unordered adjacency.  Arrowhead and tail compare endpoint
marks: an edge j -> i puts a tail at j and an arrowhead at i on the pair
{j, i}; an edge i <-> j puts arrowheads at both ends.  Conventions for
empty denominators: precision with nothing predicted is 0, recall with
nothing true is 1.
"""

from dataclasses import dataclass

from .exceptions import ParameterError

ARROW = "arrow"
TAIL = "tail"


@dataclass(frozen=True)
class PrfScores:
    precision: float
    recall: float
    f1: float


def _prf(est_set, truth_set):
    hits = len(est_set & truth_set)
    precision = hits / len(est_set) if est_set else 0.0
    recall = hits / len(truth_set) if truth_set else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PrfScores(precision=precision, recall=recall, f1=f1)


def _check_same_size(est, truth):
    if est.d != truth.d:
        raise ParameterError(f"graphs have different sizes: {est.d} vs {truth.d}")


def adjacent_pairs(s):
    """Unordered pairs {i, j} connected by any edge."""
    pairs = set()
    for j, i in s.directed_edges():
        pairs.add((min(i, j), max(i, j)))
    for i, j in s.bidirected_edges():
        pairs.add((i, j))
    return pairs


def skeleton_prf(est, truth):
    """Precision/recall/F1 over adjacency, ignoring orientation."""
    _check_same_size(est, truth)
    return _prf(adjacent_pairs(est), adjacent_pairs(truth))


def endpoint_marks(s):
    """Set of (pair, endpoint, mark) triples carried by the graph's edges."""
    marks = set()
    for j, i in s.directed_edges():
        pair = (min(i, j), max(i, j))
        marks.add((pair, j, TAIL))
        marks.add((pair, i, ARROW))
    for i, j in s.bidirected_edges():
        marks.add(((i, j), i, ARROW))
        marks.add(((i, j), j, ARROW))
    return marks


def _mark_prf(est, truth, mark):
    _check_same_size(est, truth)
    est_marks = {m for m in endpoint_marks(est) if m[2] == mark}
    truth_marks = {m for m in endpoint_marks(truth) if m[2] == mark}
    return _prf(est_marks, truth_marks)


def arrowhead_prf(est, truth):
    """Precision/recall/F1 over arrowhead endpoint marks."""
    return _mark_prf(est, truth, ARROW)


def tail_prf(est, truth):
    """Precision/recall/F1 over tail endpoint marks."""
    return _mark_prf(est, truth, TAIL)


def all_scores(est, truth):
    """Dict of the three score levels."""
    return {
        "skeleton": skeleton_prf(est, truth),
        "arrowhead": arrowhead_prf(est, truth),
        "tail": tail_prf(est, truth),
    }
