"""Classifier-error simulation for two-class node labels.

Labels are integers: 0 for the majority class (a), 1 for the minority
class (b). A column-stochastic confusion matrix gives the probability of
each predicted class conditional on the true class; noise is simulated by
flipping every node independently according to its true-class column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COLUMN_TOL = 1e-12


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 column-stochastic misclassification matrix.

    ``x_given_y`` is P(predicted x | true y). Columns index true classes
    and each must sum to 1. The determinant must stay away from zero for
    any correction built on this matrix to exist.
    """

    a_given_a: float
    a_given_b: float
    b_given_a: float
    b_given_b: float

    def __post_init__(self) -> None:
        entries = self.to_flat()
        if any(not (0.0 <= v <= 1.0) for v in entries):
            raise ValueError(f"confusion entries must lie in [0, 1], got {entries}")
        if abs(self.a_given_a + self.b_given_a - 1.0) > COLUMN_TOL:
            raise ValueError("true-class-a column must sum to 1")
        if abs(self.a_given_b + self.b_given_b - 1.0) > COLUMN_TOL:
            raise ValueError("true-class-b column must sum to 1")

    @property
    def det(self) -> float:
        return self.a_given_a * self.b_given_b - self.a_given_b * self.b_given_a

    def to_flat(self) -> list[float]:
        """Row-major flat form [a|a, a|b, b|a, b|b], the on-disk order."""
        return [self.a_given_a, self.a_given_b, self.b_given_a, self.b_given_b]

    @classmethod
    def from_flat(cls, values) -> "ConfusionMatrix":
        vals = [float(v) for v in values]
        if len(vals) != 4:
            raise ValueError("expected 4 entries in row-major order")
        return cls(*vals)

    def as_array(self) -> np.ndarray:
        return np.array(
            [[self.a_given_a, self.a_given_b], [self.b_given_a, self.b_given_b]]
        )


IDENTITY_CONFUSION = ConfusionMatrix(1.0, 0.0, 0.0, 1.0)


def symmetric_confusion(rate: float) -> ConfusionMatrix:
    """Confusion matrix with equal off-diagonal misclassification rate.

    Rates of 0.5 or more are rejected: the matrix would be singular (or
    anti-diagonal dominant) and no correction could recover anything.
    """
    if not 0.0 <= rate < 0.5:
        raise ValueError(f"misclassification rate must lie in [0, 0.5), got {rate}")
    return ConfusionMatrix(1.0 - rate, rate, rate, 1.0 - rate)


def apply_noise(labels, confusion: ConfusionMatrix, rng_seed=None) -> np.ndarray:
    """Flip each label independently per its true-class column of ``confusion``.

    Deterministic for a fixed seed. Returns a new int8 array.
    """
    arr = np.asarray(labels, dtype=np.int8)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("labels must be 0 (majority) or 1 (minority)")
    rng = np.random.default_rng(rng_seed)
    u = rng.random(arr.shape[0])
    flip = np.where(arr == 1, u < confusion.a_given_b, u < confusion.b_given_a)
    return np.where(flip, 1 - arr, arr).astype(np.int8)


def empirical_confusion(true_labels, predicted_labels) -> ConfusionMatrix:
    """Column-normalized count matrix from (true, predicted) label pairs.

    Raises if one of the true classes is absent, since its column would
    be undefined.
    """
    t = np.asarray(true_labels)
    p = np.asarray(predicted_labels)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("label lists must be equal-length and one-dimensional")
    n_a = int((t == 0).sum())
    n_b = int((t == 1).sum())
    if n_a == 0 or n_b == 0:
        raise ValueError("both true classes must be present to estimate a confusion matrix")
    return ConfusionMatrix(
        float(((p == 0) & (t == 0)).sum()) / n_a,
        float(((p == 0) & (t == 1)).sum()) / n_b,
        float(((p == 1) & (t == 0)).sum()) / n_a,
        float(((p == 1) & (t == 1)).sum()) / n_b,
    )


@dataclass(frozen=True)
class DyadicMatrix:
    """3x3 map from true edge-type shares (aa, ab, bb) to measured shares.

    Entries multiply the two endpoints' independent flip probabilities,
    so columns sum to 1 like the node-level matrix.
    """

    rows: tuple[tuple[float, float, float], ...]

    @property
    def det(self) -> float:
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def apply(self, shares) -> tuple[float, float, float]:
        x, y, z = shares
        return tuple(r[0] * x + r[1] * y + r[2] * z for r in self.rows)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows)


def dyadic_matrix(confusion: ConfusionMatrix) -> DyadicMatrix:
    """Edge-level misclassification matrix under independent endpoint noise."""
    aa = confusion.a_given_a
    ab = confusion.a_given_b
    ba = confusion.b_given_a
    bb = confusion.b_given_b
    return DyadicMatrix(
        (
            (aa * aa, aa * ab, ab * ab),
            (2.0 * aa * ba, aa * bb + ab * ba, 2.0 * ab * bb),
            (ba * ba, ba * bb, bb * bb),
        )
    )
