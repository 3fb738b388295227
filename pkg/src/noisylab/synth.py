"""Synthetic benchmark generation and external file ingestion.

The synthetic regime is a Gaussian mixture with orthogonally placed class
centers; label corruption is driven by a class-conditional noise matrix so
that severely unbalanced per-class accuracy (one class near 0.01, another
near 0.95) can be reproduced at desk scale. External features and
pseudo-label probabilities are ingested from small CSV formats documented
in the README.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, LabelMatrix, NoiseMatrix, project_rows
from .errors import ConfigError, DataFormatError, ShapeError


@dataclass
class SynthConfig:
    num_classes: int = 10
    per_class_count: int = 100
    feature_dim: int = 16
    class_center_separation: float = 4.0
    intra_class_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        if self.per_class_count < 1:
            raise ConfigError("per_class_count must be >= 1")
        if self.class_center_separation <= 0 or self.intra_class_std <= 0:
            raise ConfigError("separation and std must be positive")


class NoiseSpec:
    """Class-conditional corruption specification.

    Three equivalent ways to state it: an explicit row-stochastic matrix, a
    per-class accuracy vector (off-diagonal mass spread uniformly), or a
    list of concentrated confusion pairs.
    """

    def __init__(self, matrix):
        self.noise_matrix = matrix if isinstance(matrix, NoiseMatrix) else NoiseMatrix(matrix)

    @property
    def matrix(self):
        return self.noise_matrix.matrix

    @property
    def num_classes(self):
        return self.noise_matrix.num_classes

    @classmethod
    def from_matrix(cls, matrix):
        return cls(matrix)

    @classmethod
    def from_accuracy(cls, per_class_accuracy):
        """Diagonal = accuracy vector, off-diagonal mass uniform."""
        acc = np.asarray(per_class_accuracy, dtype=np.float64).ravel()
        c = acc.size
        if c < 2:
            raise ConfigError("accuracy vector needs at least 2 classes")
        if np.any(acc < 0.0) or np.any(acc > 1.0):
            raise ConfigError("per-class accuracies must lie in [0, 1]")
        m = np.repeat(((1.0 - acc) / (c - 1))[:, None], c, axis=1)
        m[np.diag_indices(c)] = acc
        return cls(m)

    @classmethod
    def from_confusions(cls, num_classes, pairs):
        """pairs: iterable of (true_class, labeled_as, mass). Remaining mass
        stays on the diagonal."""
        m = np.eye(num_classes)
        for j, k, mass in pairs:
            if not (0 <= j < num_classes and 0 <= k < num_classes):
                raise ConfigError(f"confusion pair ({j}, {k}) out of range")
            if j == k:
                raise ConfigError("confusion pairs must move mass off-diagonal")
            if mass < 0.0:
                raise ConfigError("confusion mass must be non-negative")
            m[j, j] -= mass
            m[j, k] += mass
        if np.any(m < -1e-12):
            raise ConfigError("confusion masses exceed 1 for some class")
        return cls(np.clip(m, 0.0, None))

    @classmethod
    def identity(cls, num_classes):
        return cls(np.eye(num_classes))


def generate_gaussian_mixture(cfg: SynthConfig) -> Dataset:
    """Isotropic Gaussian clusters on orthogonal center directions.

    Centers are `separation`-scaled rows of a random orthonormal basis, so
    every pair of centers is exactly separation*sqrt(2) apart. Requires
    feature_dim >= num_classes. Deterministic in cfg.seed.
    """
    c, d = cfg.num_classes, cfg.feature_dim
    if d < c:
        raise ConfigError(
            f"orthogonal center placement needs feature_dim >= num_classes "
            f"({d} < {c})"
        )
    rng = np.random.default_rng(cfg.seed)
    basis, _ = np.linalg.qr(rng.normal(size=(d, c)))
    centers = cfg.class_center_separation * basis.T  # c x d, orthogonal rows
    n = c * cfg.per_class_count
    features = np.empty((n, d))
    labels = np.repeat(np.arange(c), cfg.per_class_count)
    for j in range(c):
        block = slice(j * cfg.per_class_count, (j + 1) * cfg.per_class_count)
        features[block] = centers[j] + rng.normal(
            scale=cfg.intra_class_std, size=(cfg.per_class_count, d)
        )
    return Dataset(features=features, num_classes=c, true_labels=labels)


def inject_noise(dataset: Dataset, spec: NoiseSpec, confidence: float = 0.9,
                 seed: int = 0) -> LabelMatrix:
    """Sample corrupted hard labels from the spec and soften them.

    Each instance draws a label k from its true class's row of the noise
    matrix; the initial soft label puts `confidence` on k and spreads the
    rest uniformly over the other classes.
    """
    if dataset.true_labels is None:
        raise ConfigError("noise injection needs a dataset with true labels")
    if spec.num_classes != dataset.num_classes:
        raise ShapeError(
            f"noise spec has {spec.num_classes} classes, dataset {dataset.num_classes}"
        )
    if not 0.0 < confidence <= 1.0:
        raise ConfigError(f"confidence must be in (0, 1], got {confidence}")
    c = dataset.num_classes
    rng = np.random.default_rng(seed)
    hard = np.empty(dataset.n, dtype=np.int64)
    for j in range(c):  # fixed class order keeps draws reproducible
        idx = np.flatnonzero(dataset.true_labels == j)
        if idx.size:
            hard[idx] = rng.choice(c, size=idx.size, p=spec.matrix[j])
    off = (1.0 - confidence) / (c - 1)
    soft = np.full((dataset.n, c), off)
    soft[np.arange(dataset.n), hard] = confidence
    return LabelMatrix(soft_labels=soft)


# ---------------------------------------------------------------------------
# External file formats (see README for the grammar)

def _fmt(x):
    return f"{float(x):.17g}"


def save_features(path, features):
    features = np.asarray(features, dtype=np.float64)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"d={features.shape[1]}\n")
        for row in features:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def save_labels(path, soft_labels, class_names=None):
    soft_labels = np.asarray(soft_labels, dtype=np.float64)
    c = soft_labels.shape[1]
    header = f"C={c}"
    if class_names is not None:
        if len(class_names) != c:
            raise ShapeError(f"{len(class_names)} names for {c} classes")
        header += "," + ",".join(class_names)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in soft_labels:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def save_truth(path, true_labels):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for v in np.asarray(true_labels, dtype=np.int64).ravel():
            fh.write(f"{v}\n")


def _parse_header(line, key, path):
    prefix = f"{key}="
    parts = line.strip().split(",")
    if not parts[0].startswith(prefix):
        raise DataFormatError(f"{path}: expected header '{prefix}<int>', got {line!r}")
    try:
        value = int(parts[0][len(prefix):])
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad header count in {line!r}") from exc
    return value, parts[1:]


def _parse_rows(lines, width, path):
    rows = []
    for lineno, line in lines:
        cells = line.strip().split(",")
        if len(cells) != width:
            raise DataFormatError(
                f"{path} line {lineno}: expected {width} values, got {len(cells)}"
            )
        try:
            rows.append([float(v) for v in cells])
        except ValueError as exc:
            raise DataFormatError(f"{path} line {lineno}: non-numeric cell ({exc})") from exc
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), width)


def _numbered_nonempty(path):
    with open(path, encoding="ascii") as fh:
        return [
            (lineno, line)
            for lineno, line in enumerate(fh, start=1)
            if line.strip()
        ]


def load_features(path):
    lines = _numbered_nonempty(path)
    if not lines:
        raise DataFormatError(f"{path}: empty feature file")
    d, _ = _parse_header(lines[0][1], "d", path)
    return _parse_rows(lines[1:], d, path)


def load_labels(path):
    """Returns (projected row-stochastic labels, class_names or None)."""
    lines = _numbered_nonempty(path)
    if not lines:
        raise DataFormatError(f"{path}: empty label file")
    c, names = _parse_header(lines[0][1], "C", path)
    if names and len(names) != c:
        raise DataFormatError(
            f"{path}: header names {len(names)} classes, count says {c}"
        )
    raw = _parse_rows(lines[1:], c, path)
    return project_rows(raw), (names or None)


def load_truth(path):
    labels = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError as exc:
                raise DataFormatError(f"{path} line {lineno}: non-integer label") from exc
    return np.asarray(labels, dtype=np.int64)


def load_external(features_path, labels_path, truth_path=None):
    """Load an externally produced (features, pseudo-label) pair.

    Label rows are renormalized onto the simplex; row counts of the two
    files are cross-checked.
    """
    features = load_features(features_path)
    labels, names = load_labels(labels_path)
    if features.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"row count mismatch: {features.shape[0]} feature rows vs "
            f"{labels.shape[0]} label rows"
        )
    truth = None
    if truth_path is not None:
        truth = load_truth(truth_path)
        if truth.shape[0] != features.shape[0]:
            raise DataFormatError(
                f"row count mismatch: {features.shape[0]} feature rows vs "
                f"{truth.shape[0]} truth labels"
            )
    dataset = Dataset(
        features=features,
        num_classes=labels.shape[1],
        true_labels=truth,
        class_names=names,
    )
    return dataset, LabelMatrix(soft_labels=labels)
