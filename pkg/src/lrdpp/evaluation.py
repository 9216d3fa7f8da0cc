"""
Basket-completion evaluation: hold one item out of each test basket, rank
every candidate item, and summarise where the held-out item landed.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .conditioning import condition, next_item_probabilities
from .data import Basket, BasketDataset
from .errors import ConditioningError, EvaluationError
from .kernel import TraitsLike
from .likelihood import UNSEEN_COUNT

logger = logging.getLogger(__name__)

DEFAULT_KS: Tuple[int, ...] = (1, 5, 10, 20)
DEFAULT_POP_BETA = 0.5

# A scorer maps an observed basket to (candidate indices, scores).
Scorer = Callable[[Basket], Tuple[np.ndarray, np.ndarray]]


class EvalInstance(NamedTuple):
    observed: Basket
    held_out: int


class ScoredInstance(NamedTuple):
    instance: EvalInstance
    percentile_rank: float
    rank: int
    n_candidates: int


@dataclass
class EvalReport:
    mpr: float
    precision_at: Dict[int, float]
    pop_weighted_precision_at: Dict[int, float]
    beta: float
    n_instances: int
    n_skipped: int = 0
    skip_reasons: Dict[str, int] = field(default_factory=dict)
    test_log_likelihood: Optional[float] = None

    def to_lines(self) -> List[str]:
        """Machine-readable form: one ``name k value`` line per metric."""
        lines = [f"mpr - {self.mpr!r}"]
        lines += [f"precision_at {k} {v!r}" for k, v in sorted(self.precision_at.items())]
        lines += [f"pop_weighted_precision_at {k} {v!r}" for k, v in sorted(self.pop_weighted_precision_at.items())]
        lines.append(f"beta - {self.beta!r}")
        if self.test_log_likelihood is not None:
            lines.append(f"test_ll - {self.test_log_likelihood!r}")
        lines.append(f"n_instances - {self.n_instances}")
        lines.append(f"n_skipped - {self.n_skipped}")
        return lines


def make_instances(test_set: Union[BasketDataset, Sequence[Basket]], seed: int) -> List[EvalInstance]:
    """Remove one uniformly chosen item from each test basket."""
    baskets = getattr(test_set, "baskets", test_set)
    rng = np.random.default_rng(seed)
    instances = []
    for basket in baskets:
        if len(basket) < 2:
            raise EvaluationError(f"Test baskets need at least 2 items, got {list(basket)}")
        j = int(rng.integers(len(basket)))
        instances.append(EvalInstance(tuple(basket[:j] + basket[j + 1 :]), int(basket[j])))
    return instances


def dpp_scorer(V: TraitsLike) -> Scorer:
    """Score candidates by their conditional next-item probability."""

    def score(observed: Basket) -> Tuple[np.ndarray, np.ndarray]:
        cm = condition(V, observed)
        return cm.candidates, next_item_probabilities(cm)

    return score


def _as_scorer(model: Union[Scorer, TraitsLike]) -> Scorer:
    return model if callable(model) else dpp_scorer(model)


def percentile_rank(scores: np.ndarray, held_out: int) -> float:
    """PR = 100 * |{j' : p_held >= p_j'}| / |C|, counting the held-out item itself."""
    scores = np.asarray(scores, dtype=np.float64)
    return 100.0 * float(np.count_nonzero(scores[held_out] >= scores)) / scores.size


def completion_rank(candidates: np.ndarray, scores: np.ndarray, held_out: int) -> int:
    """1-based position of ``held_out`` (a position into scores) under the ranking tie rule."""
    s = scores[held_out]
    ahead = np.count_nonzero(scores > s)
    tied_before = np.count_nonzero((scores == s) & (candidates < candidates[held_out]))
    return int(ahead + tied_before + 1)


def _score_one(scorer: Scorer, instance: EvalInstance) -> ScoredInstance:
    candidates, scores = scorer(instance.observed)
    candidates = np.asarray(candidates)
    scores = np.asarray(scores, dtype=np.float64)
    positions = np.flatnonzero(candidates == instance.held_out)
    if positions.size != 1:
        raise EvaluationError(f"Held-out item {instance.held_out} is not among the candidates")
    pos = int(positions[0])
    return ScoredInstance(
        instance,
        percentile_rank(scores, pos),
        completion_rank(candidates, scores, pos),
        int(candidates.size),
    )


def score_instances(
    instances: Sequence[EvalInstance],
    model: Union[Scorer, TraitsLike],
    workers: int = 1,
) -> Tuple[List[ScoredInstance], Dict[str, int]]:
    """
    Score every instance. Instances whose observed basket cannot be
    conditioned on are skipped and tallied by reason.
    """
    scorer = _as_scorer(model)

    def attempt(instance: EvalInstance) -> Union[ScoredInstance, str]:
        try:
            return _score_one(scorer, instance)
        except ConditioningError as exc:
            return str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, instances))
    else:
        outcomes = [attempt(instance) for instance in instances]

    scored = [o for o in outcomes if isinstance(o, ScoredInstance)]
    skipped = Counter(o for o in outcomes if isinstance(o, str))
    if skipped:
        logger.warning("Skipped %d of %d instances: %s", sum(skipped.values()), len(instances), dict(skipped))
    if not scored:
        raise EvaluationError(f"None of the {len(instances)} evaluation instances could be scored")
    return scored, dict(skipped)


def _weighted_hit_rate(ranks: np.ndarray, k: int, weights: np.ndarray) -> float:
    hits = (ranks <= k).astype(np.float64)
    return float(np.sum(weights * hits) / np.sum(weights))


def _mpr(scored: Sequence[ScoredInstance]) -> float:
    return float(np.mean([s.percentile_rank for s in scored]))


def _precision(scored: Sequence[ScoredInstance], ks: Sequence[int], weights: np.ndarray) -> Dict[int, float]:
    ranks = np.array([s.rank for s in scored])
    return {int(k): _weighted_hit_rate(ranks, int(k), weights) for k in ks}


def popularity_instance_weights(
    scored: Sequence[ScoredInstance],
    train_counts: np.ndarray,
    beta: float,
) -> np.ndarray:
    """w_t proportional to 1 / C(t)^beta for the held-out item of each instance."""
    counts = np.asarray(train_counts, dtype=np.float64)
    held = np.array([s.instance.held_out for s in scored])
    c = counts[held]
    c = np.where(c > 0, c, UNSEEN_COUNT)
    return np.power(c, -beta)


def mpr(instances: Sequence[EvalInstance], model: Union[Scorer, TraitsLike], workers: int = 1) -> float:
    """Mean percentile rank over the scorable instances."""
    if not instances:
        raise EvaluationError("No evaluation instances")
    scored, _ = score_instances(instances, model, workers)
    return _mpr(scored)


def precision_at_k(
    instances: Sequence[EvalInstance],
    model: Union[Scorer, TraitsLike],
    ks: Sequence[int] = DEFAULT_KS,
    workers: int = 1,
) -> Dict[int, float]:
    """Fraction of instances whose held-out item ranks within the top k."""
    scored, _ = score_instances(instances, model, workers)
    return _precision(scored, ks, np.ones(len(scored)))


def pop_weighted_precision_at_k(
    instances: Sequence[EvalInstance],
    model: Union[Scorer, TraitsLike],
    ks: Sequence[int],
    train_counts: np.ndarray,
    beta: float = DEFAULT_POP_BETA,
    workers: int = 1,
) -> Dict[int, float]:
    """precision@k with instances weighted towards rarely bought held-out items."""
    scored, _ = score_instances(instances, model, workers)
    return _precision(scored, ks, popularity_instance_weights(scored, train_counts, beta))


def evaluate(
    instances: Sequence[EvalInstance],
    model: Union[Scorer, TraitsLike],
    ks: Sequence[int],
    train_counts: np.ndarray,
    beta: float = DEFAULT_POP_BETA,
    workers: int = 1,
) -> EvalReport:
    """All ranking metrics from a single scoring pass."""
    if not instances:
        raise EvaluationError("No evaluation instances")
    scored, skipped = score_instances(instances, model, workers)
    return EvalReport(
        mpr=_mpr(scored),
        precision_at=_precision(scored, ks, np.ones(len(scored))),
        pop_weighted_precision_at=_precision(scored, ks, popularity_instance_weights(scored, train_counts, beta)),
        beta=beta,
        n_instances=len(scored),
        n_skipped=sum(skipped.values()),
        skip_reasons=skipped,
    )
