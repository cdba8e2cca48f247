"""Objective formulations and the wrapper evaluation context.

All formulations are maximized.  Subset size enters negated so that every
objective points the same way.  Evaluation trains the wrapper classifier on
the projected training rows and scores the held-out validation rows; results
are memoized per exact bitstring for the lifetime of the context (one run).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import classifiers, metrics
from .dataset import FeatureTable
from .errors import ConfigurationError
from .genotype import Genome


class Formulation(Enum):
    """Which objective vector the search optimizes."""

    DR3 = ("neg_size", "accuracy", "detection_rate")
    ACC2 = ("neg_size", "accuracy")
    F12 = ("neg_size", "f1")
    ACC1 = ("accuracy",)

    @property
    def objective_names(self) -> tuple[str, ...]:
        return self.value

    @property
    def arity(self) -> int:
        return len(self.value)

    @staticmethod
    def parse(text: str) -> "Formulation":
        try:
            return Formulation[text.strip().upper()]
        except KeyError:
            names = ", ".join(f.name.lower() for f in Formulation)
            raise ConfigurationError(
                f"unknown formulation {text!r} (choose from {names})"
            ) from None


ObjectiveVector = tuple[float, ...]


@dataclass(frozen=True)
class ValidationScores:
    """Raw wrapper scores of one subset on the validation rows."""

    size: int
    accuracy: float
    detection_rate: float
    f1: float


@dataclass
class EvaluationContext:
    """Training and validation tables plus the wrapper classifier config.

    The validation table must contain both classes, otherwise detection rate
    or F1 could be undefined mid-search.
    """

    train: FeatureTable
    validation: FeatureTable
    classifier: classifiers.TrainConfig
    formulation: Formulation
    cache: dict[bytes, ValidationScores] = field(default_factory=dict)

    def __post_init__(self):
        self.classifier.validate()
        if self.train.feature_count != self.validation.feature_count:
            raise ConfigurationError("train/validation column counts differ")
        if self.train.row_count == 0 or self.validation.row_count == 0:
            raise ConfigurationError("train and validation tables must be non-empty")
        if self.validation.attack_count == 0:
            raise ConfigurationError("validation rows contain no attacks")
        if self.validation.attack_count == self.validation.row_count:
            raise ConfigurationError("validation rows contain no normals")

    @property
    def feature_count(self) -> int:
        return self.train.feature_count

    def scores(self, genome: Genome) -> ValidationScores:
        """Memoized raw validation scores for one genome."""
        key = genome.tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        result = score_subset(genome, self.train, self.validation, self.classifier)
        self.cache[key] = result
        return result


def score_subset(genome: Genome, train: FeatureTable, holdout: FeatureTable,
                 cfg: classifiers.TrainConfig) -> ValidationScores:
    """Train the wrapper on the genome's columns and score the holdout rows."""
    cols = np.flatnonzero(genome)
    if cols.size == 0:
        raise ValueError("cannot evaluate an empty feature subset")
    if genome.shape[0] != train.feature_count:
        raise ValueError("genome length does not match the table width")
    model = classifiers.train(train.values[:, cols], train.labels, cfg)
    predictions = classifiers.predict(model, holdout.values[:, cols])
    cm = metrics.confusion(holdout.labels, predictions)
    return ValidationScores(
        size=int(cols.size),
        accuracy=metrics.accuracy(cm),
        detection_rate=metrics.detection_rate(cm),
        f1=metrics.f1(cm),
    )


def size(genome: Genome) -> int:
    """Number of selected features (popcount)."""
    return int(np.asarray(genome).sum())


def assemble(formulation: Formulation, scores: ValidationScores) -> ObjectiveVector:
    """Build the formulation's objective vector from raw scores."""
    by_name = {
        "neg_size": -float(scores.size),
        "accuracy": scores.accuracy,
        "detection_rate": scores.detection_rate,
        "f1": scores.f1,
    }
    return tuple(by_name[n] for n in formulation.objective_names)


def evaluate(genome: Genome, ctx: EvaluationContext) -> ObjectiveVector:
    """Objective vector of one genome under the context's formulation."""
    return assemble(ctx.formulation, ctx.scores(genome))


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """Pareto dominance for maximization: a is nowhere worse and somewhere
    strictly better."""
    if len(a) != len(b):
        raise ValueError("objective vectors have different arity")
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))
