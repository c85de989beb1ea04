"""Embedding datasets: CSV I/O, stratified splitting, synthetic domain shift.

CSV layout (UTF-8, ``\\n`` line endings, no quoting)::

    id,f0,f1,...,f{d-1},label

``id`` is optional, ``label`` (0 = bona fide, 1 = deepfake) may be omitted
for unlabeled target files.
"""

import math
import os
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    ParseError,
    SchemaError,
    StratificationError,
    ValidationError,
)
from .rng import Stream


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature rows with optional binary labels and optional string ids."""

    features: np.ndarray
    labels: Optional[np.ndarray] = None
    ids: Optional[tuple] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("features contain non-finite values")
        object.__setattr__(self, "features", X)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (X.shape[0],):
                raise DimensionMismatchError(f"{y.shape[0] if y.ndim else 0} labels for {X.shape[0]} rows")
            if not np.all((y == 0) | (y == 1)):
                raise ValidationError("labels must be 0 or 1")
            object.__setattr__(self, "labels", y.astype(np.int64))
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != X.shape[0]:
                raise DimensionMismatchError(f"{len(ids)} ids for {X.shape[0]} rows")
            object.__setattr__(self, "ids", ids)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def labeled(self):
        return self.labels is not None

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return LabeledDataset(
            self.features[index],
            None if self.labels is None else self.labels[index],
            None if self.ids is None else tuple(self.ids[i] for i in index),
        )

    def without_labels(self):
        return LabeledDataset(self.features, None, self.ids)

    def equals(self, other, atol=0.0):
        if self.features.shape != other.features.shape:
            return False
        if not np.allclose(self.features, other.features, rtol=0.0, atol=atol):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        return self.ids == other.ids


# --- CSV -------------------------------------------------------------------


def _parse_header(header):
    cols = header.split(",")
    has_id = bool(cols) and cols[0] == "id"
    if has_id:
        cols = cols[1:]
    has_label = bool(cols) and cols[-1] == "label"
    if has_label:
        cols = cols[:-1]
    d = len(cols)
    if d == 0:
        raise SchemaError("header declares no feature columns")
    expected = [f"f{j}" for j in range(d)]
    if cols != expected:
        bad = next(c for c, e in zip(cols, expected) if c != e)
        raise SchemaError(f"unexpected column {bad!r}; features must be named f0..f{d - 1}")
    return has_id, d, has_label


def read_embeddings_csv(path, require_labels=False):
    """Read an embedding CSV into a :class:`LabeledDataset`.

    Row order is preserved. Without an ``id`` column, ids are the row
    indices as strings. Errors report 1-based file line numbers.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    has_id, d, has_label = _parse_header(lines[0])
    if require_labels and not has_label:
        raise SchemaError(f"{path}: a 'label' column is required")
    width = d + has_id + has_label
    rows = lines[1:]
    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")

    X = np.empty((len(rows), d))
    y = np.empty(len(rows), dtype=np.int64) if has_label else None
    ids = []
    lo = 1 if has_id else 0
    for i, line in enumerate(rows):
        lineno = i + 2
        cells = line.split(",")
        if len(cells) != width:
            raise SchemaError(f"{path}: line {lineno}: expected {width} columns, found {len(cells)}")
        ids.append(cells[0] if has_id else str(i))
        try:
            X[i] = [float(c) for c in cells[lo:lo + d]]
        except ValueError as exc:
            raise ParseError(f"non-numeric feature value ({exc})", row=lineno) from None
        if not np.all(np.isfinite(X[i])):
            raise ParseError("non-finite feature value", row=lineno)
        if has_label:
            cell = cells[-1].strip()
            if cell not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {cell!r}", row=lineno)
            y[i] = int(cell)
    return LabeledDataset(X, y, tuple(ids))


def format_csv(ds):
    if ds.n == 0:
        raise EmptyDatasetError("refusing to write an empty dataset")
    if ds.d == 0:
        raise SchemaError("dataset has no feature columns")
    header = [f"f{j}" for j in range(ds.d)]
    if ds.ids is not None:
        for i in ds.ids:
            if "," in i or "\n" in i or "\r" in i:
                raise ValidationError(f"id {i!r} contains a separator character")
        header.insert(0, "id")
    if ds.labels is not None:
        header.append("label")
    out = [",".join(header)]
    for i in range(ds.n):
        cells = ["%.17g" % v for v in ds.features[i]]
        if ds.ids is not None:
            cells.insert(0, ds.ids[i])
        if ds.labels is not None:
            cells.append(str(int(ds.labels[i])))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def write_features_csv(ds, path):
    """Write ``ds`` with 17 significant digits; reading it back is lossless."""
    text = format_csv(ds)
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- splitting ---------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _round_half_up(x):
    # 1e-9 absorbs representation error such as 5 * (1 - 0.9) = 0.4999...
    return int(math.floor(x + 0.5 + 1e-9))


def stratified_test_count(n_class, train_fraction):
    t = _round_half_up(n_class * (1.0 - train_fraction))
    return min(max(t, 1), n_class - 1)


def stratified_split(ds, spec):
    """Per-class seeded split; both partitions keep the original row order."""
    if ds.labels is None:
        raise StratificationError("stratified split needs labels")
    test_idx = []
    for c in (0, 1):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0:
            continue
        if members.size < 2:
            raise StratificationError(f"class {c} has {members.size} sample(s); need at least 2")
        t = stratified_test_count(members.size, spec.train_fraction)
        perm = Stream(spec.seed, f"split/class{c}").permutation(members.size)
        test_idx.append(members[perm[:t]])
    is_test = np.zeros(ds.n, dtype=bool)
    is_test[np.concatenate(test_idx)] = True
    return ds.subset(np.flatnonzero(~is_test)), ds.subset(np.flatnonzero(is_test))


# --- synthetic domain shift ------------------------------------------------------


@dataclass(frozen=True)
class SyntheticShiftSpec:
    """Parameters of the two-domain Gaussian generator.

    ``class_separation`` is the distance between the class means in units
    of the (unit) within-class standard deviation. ``target_label_fraction``
    is the share of class 1 in the target domain; the source is balanced.
    """

    n_source: int = 1000
    n_target: int = 1000
    d_informative: int = 16
    d_noise: int = 48
    class_separation: float = 3.0
    rotation_strength: float = 0.8
    translation_strength: float = 2.0
    skew_strength: float = 0.5
    target_label_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("n_source", "n_target", "d_informative"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.d_noise < 0:
            raise ValidationError("d_noise must be >= 0")
        for name in ("class_separation", "rotation_strength", "translation_strength", "skew_strength"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be >= 0")
        if not 0.0 < self.target_label_fraction < 1.0:
            raise ValidationError("target_label_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown synthetic spec keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _class_counts(n, fraction):
    n1 = _round_half_up(n * fraction)
    if n >= 2:
        n1 = min(max(n1, 1), n - 1)
    return n - n1, n1


def _draw_domain(spec, n, fraction, direction, tag):
    n0, n1 = _class_counts(n, fraction)
    d = spec.d_informative + spec.d_noise
    order = Stream(spec.seed, f"synth/{tag}/order").permutation(n)
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])[order]
    X = Stream(spec.seed, f"synth/{tag}/noise").normal((n, d))
    X[:, : spec.d_informative] += np.outer(y - 0.5, spec.class_separation * direction)
    return X, y


def random_rotation(d, seed):
    """Haar-distributed rotation (determinant +1) from a seeded Gaussian QR."""
    G = Stream(seed, "synth/rotation").normal((d, d))
    Q, R = np.linalg.qr(G)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def rotation_mix(d, strength, seed):
    """``(1 - strength) I + strength Q`` for a seeded random rotation ``Q``.

    Its eigenvalues have modulus at least ``|1 - 2 strength|``, so the map is
    invertible except (with probability zero) at ``strength = 0.5``.
    """
    if strength == 0:
        return np.eye(d)
    return (1.0 - strength) * np.eye(d) + strength * random_rotation(d, seed)


def generate_synthetic_domains(spec):
    """Labeled source and target domains; the target carries the configured shift.

    Target shift, applied in order: the linear mix ``x -> M x`` with
    ``M = (1 - r) I + r Q`` (``r`` = rotation_strength), translation by a
    seeded vector of norm ``translation_strength``, then the monotone skew
    ``x -> sign(x) |x|^(1 + skew_strength)`` on a seeded half of the columns.
    """
    d = spec.d_informative + spec.d_noise
    u = Stream(spec.seed, "synth/direction").normal(spec.d_informative)
    u /= np.linalg.norm(u)

    Xs, ys = _draw_domain(spec, spec.n_source, 0.5, u, "source")
    Xt, yt = _draw_domain(spec, spec.n_target, spec.target_label_fraction, u, "target")

    M = rotation_mix(d, spec.rotation_strength, spec.seed)
    Xt = Xt @ M.T
    shift = Stream(spec.seed, "synth/translation").normal(d)
    Xt = Xt + spec.translation_strength * shift / np.linalg.norm(shift)
    if spec.skew_strength > 0:
        cols = Stream(spec.seed, "synth/skew").permutation(d)[: d // 2]
        block = Xt[:, cols]
        Xt[:, cols] = np.sign(block) * np.abs(block) ** (1.0 + spec.skew_strength)

    source = LabeledDataset(Xs, ys, tuple(f"s{i}" for i in range(spec.n_source)))
    target = LabeledDataset(Xt, yt, tuple(f"t{i}" for i in range(spec.n_target)))
    return source, target
