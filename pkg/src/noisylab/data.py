"""Dataset, label, noise-matrix and run-report containers.

These are the carriers shared by every other module: instances live in a
feature matrix, supervision lives in a row-stochastic label matrix whose
initial state is frozen, and label corruption is described by a square
row-stochastic noise matrix.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataFormatError,
    EmptyDatasetError,
    NonFiniteError,
    ShapeError,
)

SIMPLEX_ATOL = 1e-9


def argmax_rows(matrix):
    """Row-wise argmax with deterministic tie-breaking (lowest index wins)."""
    return np.argmax(np.asarray(matrix), axis=1)


def accuracy(pred_labels, true_labels):
    pred_labels = np.asarray(pred_labels)
    true_labels = np.asarray(true_labels)
    if pred_labels.shape != true_labels.shape:
        raise ShapeError(
            f"label vectors differ in length: {pred_labels.shape} vs {true_labels.shape}"
        )
    return float(np.mean(pred_labels == true_labels))


def per_class_accuracy(pred_labels, true_labels, num_classes):
    """Accuracy restricted to each true class; NaN for absent classes."""
    pred_labels = np.asarray(pred_labels)
    true_labels = np.asarray(true_labels)
    out = np.full(num_classes, np.nan)
    for j in range(num_classes):
        mask = true_labels == j
        if mask.any():
            out[j] = float(np.mean(pred_labels[mask] == j))
    return out


def simplex_project(row):
    """Clamp negatives to zero and renormalize to a probability vector.

    All-zero rows become uniform so that degenerate inputs stay usable.
    """
    row = np.asarray(row, dtype=np.float64).ravel()
    if not np.all(np.isfinite(row)):
        raise NonFiniteError("simplex projection of non-finite input")
    clipped = np.maximum(row, 0.0)
    total = clipped.sum()
    if total == 0.0:
        return np.full(row.shape, 1.0 / row.size)
    return clipped / total


def project_rows(matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    return np.vstack([simplex_project(r) for r in matrix])


def _check_simplex_rows(matrix, what):
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError(f"{what} contains non-finite entries")
    if np.any(matrix < -SIMPLEX_ATOL):
        raise ShapeError(f"{what} has negative entries")
    sums = matrix.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=SIMPLEX_ATOL):
        worst = float(np.abs(sums - 1.0).max())
        raise ShapeError(f"{what} rows deviate from the simplex by {worst:.3e}")


@dataclass
class Dataset:
    """Feature vectors with optional evaluation-only ground truth."""

    features: np.ndarray
    num_classes: int
    true_labels: np.ndarray | None = None
    class_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got {self.features.shape}")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise EmptyDatasetError(f"dataset needs n >= 1 and d >= 1, got {n}x{d}")
        if self.num_classes < 2:
            raise ShapeError(f"need at least 2 classes, got {self.num_classes}")
        if self.true_labels is not None:
            self.true_labels = np.asarray(self.true_labels, dtype=np.int64).ravel()
            if self.true_labels.shape[0] != n:
                raise ShapeError(
                    f"{self.true_labels.shape[0]} labels for {n} instances"
                )
            if self.true_labels.min() < 0 or self.true_labels.max() >= self.num_classes:
                raise ShapeError("true labels outside [0, num_classes)")
        if self.class_names is not None and len(self.class_names) != self.num_classes:
            raise ShapeError(
                f"{len(self.class_names)} class names for {self.num_classes} classes"
            )

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


class LabelMatrix:
    """Soft training labels plus the frozen initial labels and the running
    sum of per-epoch predictions that the ensemble update averages over."""

    def __init__(self, soft_labels, initial_labels=None, epoch=0, prediction_sum=None):
        self.soft_labels = np.ascontiguousarray(soft_labels, dtype=np.float64)
        if self.soft_labels.ndim != 2:
            raise ShapeError(f"soft labels must be 2-D, got {self.soft_labels.shape}")
        if initial_labels is None:
            initial_labels = self.soft_labels.copy()
        self.initial_labels = np.ascontiguousarray(initial_labels, dtype=np.float64)
        self.initial_labels.setflags(write=False)  # frozen after construction
        if epoch < 0:
            raise ShapeError(f"epoch must be non-negative, got {epoch}")
        self.epoch = int(epoch)
        if prediction_sum is None:
            prediction_sum = np.zeros_like(self.soft_labels)
        self.prediction_sum = np.ascontiguousarray(prediction_sum, dtype=np.float64)
        for name in ("initial_labels", "prediction_sum"):
            if getattr(self, name).shape != self.soft_labels.shape:
                raise ShapeError(f"{name} shape differs from soft_labels")
        self.check()

    @property
    def n(self):
        return self.soft_labels.shape[0]

    @property
    def num_classes(self):
        return self.soft_labels.shape[1]

    def check(self):
        _check_simplex_rows(self.soft_labels, "soft_labels")
        _check_simplex_rows(self.initial_labels, "initial_labels")
        sums = self.prediction_sum.sum(axis=1)
        if not np.allclose(sums, float(self.epoch), atol=1e-6):
            raise ShapeError(
                "prediction_sum rows do not add up to the epoch count"
            )


@dataclass
class NoiseMatrix:
    """Row-stochastic class-conditional corruption matrix.

    Entry (j, k) is the probability that a true-class-j instance is labeled
    k; the diagonal is per-class labeling accuracy. `zero_support` lists rows
    that had no observations and were filled in as uniform.
    """

    matrix: np.ndarray
    zero_support: tuple = ()

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ShapeError(f"noise matrix must be square, got {self.matrix.shape}")
        if np.any(self.matrix < 0.0) or np.any(self.matrix > 1.0 + SIMPLEX_ATOL):
            raise ShapeError("noise matrix entries must lie in [0, 1]")
        _check_simplex_rows(self.matrix, "noise matrix")
        self.zero_support = tuple(int(j) for j in self.zero_support)

    @property
    def num_classes(self):
        return self.matrix.shape[0]

    @property
    def diagonal(self):
        return np.diagonal(self.matrix).copy()


def empirical_noise_matrix(pred_labels, true_labels, num_classes):
    """Observed corruption: row j is the label distribution of true class j.

    Classes that never occur in true_labels get a uniform row and are
    reported in `zero_support` instead of producing NaN.
    """
    pred_labels = np.asarray(pred_labels, dtype=np.int64).ravel()
    true_labels = np.asarray(true_labels, dtype=np.int64).ravel()
    if pred_labels.size == 0:
        raise EmptyDatasetError("empirical noise matrix of an empty label vector")
    if pred_labels.shape != true_labels.shape:
        raise ShapeError(
            f"label vectors differ in length: {pred_labels.size} vs {true_labels.size}"
        )
    for name, vec in (("pred", pred_labels), ("true", true_labels)):
        if vec.min() < 0 or vec.max() >= num_classes:
            raise ShapeError(f"{name} labels outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes))
    np.add.at(counts, (true_labels, pred_labels), 1.0)
    support = counts.sum(axis=1)
    flagged = tuple(int(j) for j in np.flatnonzero(support == 0))
    rows = np.where(
        support[:, None] > 0,
        counts / np.maximum(support[:, None], 1.0),
        1.0 / num_classes,
    )
    return NoiseMatrix(rows, zero_support=flagged)


@dataclass
class EpochRecord:
    """Metrics for one completed epoch. NaN marks metrics that were not
    computable (no ground truth, no previous epoch, loss term unused)."""

    epoch: int
    accuracy: float
    label_accuracy: float
    flip_rate: float
    mean_kl: float
    mean_cc: float
    class_accuracy: np.ndarray
    seconds: float = float("nan")


def _fmt(x):
    return f"{float(x):.17g}"


class RunReport:
    """Per-epoch metric records with deterministic CSV serialization.

    Wall-clock seconds stay in memory (and behind include_timing=True)
    because the canonical CSV must be byte-identical across reruns of the
    same (config, seed).
    """

    def __init__(self, num_classes, loss_scale="mean_per_sample"):
        self.num_classes = int(num_classes)
        self.loss_scale = loss_scale
        self.records = []

    def append(self, record):
        if self.records and record.epoch != self.records[-1].epoch + 1:
            raise ShapeError(
                f"epoch {record.epoch} after epoch {self.records[-1].epoch}"
            )
        record.class_accuracy = np.asarray(record.class_accuracy, dtype=np.float64)
        if record.class_accuracy.shape != (self.num_classes,):
            raise ShapeError("per-class accuracy length != num_classes")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def final(self):
        if not self.records:
            raise EmptyDatasetError("run report has no records")
        return self.records[-1]

    def to_csv(self, path=None, include_timing=False):
        buf = io.StringIO()
        buf.write("# noisylab run report v1\n")
        buf.write(f"# loss_scale={self.loss_scale}\n")
        cols = ["epoch", "accuracy", "label_accuracy", "flip_rate", "mean_kl", "mean_cc"]
        cols += [f"class_acc_{j}" for j in range(self.num_classes)]
        if include_timing:
            cols.append("seconds")
        buf.write(",".join(cols) + "\n")
        for r in self.records:
            row = [str(r.epoch)] + [
                _fmt(v) for v in (r.accuracy, r.label_accuracy, r.flip_rate, r.mean_kl, r.mean_cc)
            ]
            row += [_fmt(v) for v in r.class_accuracy]
            if include_timing:
                row.append(_fmt(r.seconds))
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text_or_path):
        if isinstance(text_or_path, str) and "\n" in text_or_path:
            text = text_or_path
        else:
            with open(text_or_path, encoding="ascii") as fh:
                text = fh.read()
        loss_scale = "mean_per_sample"
        header = None
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "loss_scale=" in line:
                    loss_scale = line.split("loss_scale=", 1)[1].strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataFormatError(
                    f"line {lineno}: expected {len(header)} fields, got {len(parts)}"
                )
            rows.append(parts)
        if header is None:
            raise DataFormatError("run report CSV has no header line")
        class_cols = [c for c in header if c.startswith("class_acc_")]
        report = cls(num_classes=len(class_cols), loss_scale=loss_scale)
        has_timing = "seconds" in header
        for parts in rows:
            vals = dict(zip(header, parts))
            try:
                record = EpochRecord(
                    epoch=int(vals["epoch"]),
                    accuracy=float(vals["accuracy"]),
                    label_accuracy=float(vals["label_accuracy"]),
                    flip_rate=float(vals["flip_rate"]),
                    mean_kl=float(vals["mean_kl"]),
                    mean_cc=float(vals["mean_cc"]),
                    class_accuracy=np.array([float(vals[c]) for c in class_cols]),
                    seconds=float(vals["seconds"]) if has_timing else float("nan"),
                )
            except ValueError as exc:
                raise DataFormatError(f"unparseable run report row: {exc}") from exc
            report.append(record)
        return report
