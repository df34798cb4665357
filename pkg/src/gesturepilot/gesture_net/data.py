"""Gesture vocabulary, canonical hand-shape templates and dataset tooling.

Features are 42 reals: the (x, y) screen coordinates of the 21 hand
landmarks in landmark-major order.  Normalization centres the wrist at
the origin and scales by the largest wrist-to-landmark distance, which
makes classification invariant to where the hand sits in the frame and
how close it is to the camera.

The recorded corpus behind the published accuracy number is not
available, so ``generate_dataset`` substitutes a procedural one: each of
the eight gestures has a canonical 21-point template (finger extension
pattern) that gets jittered, rotated, scaled and translated per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..errors import DegenerateSample, FormatError

FEATURE_DIM = 42
NUM_CLASSES = 8

# Generator perturbation ranges.
JITTER_SIGMA = 0.02          # fraction of hand size, per landmark coordinate
ROTATION_LIMIT = math.radians(25.0)
SCALE_RANGE = (0.5, 1.5)
TRANSLATION_RANGE = 1.0


class GestureLabel(IntEnum):
    ONE = 0
    TWO = 1
    THREE = 2
    FOUR = 3
    FIVE = 4
    OKAY = 5
    ROCK = 6
    THUMBS_UP = 7

    @property
    def key(self) -> str:
        return self.name.lower()

    @classmethod
    def from_key(cls, key: str) -> "GestureLabel":
        try:
            return cls[key.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown gesture {key!r}") from None


# ---------------------------------------------------------------------------
# Canonical templates.
#
# Built in a palm-centric frame (x right, y up, wrist at origin), then
# flipped to screen convention (y down) and scaled to max radius 1.
# Finger chains follow the standard topology: thumb 1-4, index 5-8,
# middle 9-12, ring 13-16, pinky 17-20.
# ---------------------------------------------------------------------------

_FINGER_MCPS = {
    "index": np.array([0.22, 0.42]),
    "middle": np.array([0.07, 0.45]),
    "ring": np.array([-0.07, 0.43]),
    "pinky": np.array([-0.21, 0.38]),
}

# Finger pointing directions in degrees (90 = straight up).  "Five"
# spreads the fingers; the other open-finger gestures keep a tight fan.
_TIGHT_FAN = {"index": 82.0, "middle": 89.0, "ring": 96.0, "pinky": 103.0}
_SPREAD_FAN = {"index": 70.0, "middle": 85.0, "ring": 99.0, "pinky": 114.0}

_THUMB_SHAPES = {
    # CMC, MCP, IP, TIP in the palm frame.
    "out": [(0.16, 0.10), (0.30, 0.20), (0.42, 0.30), (0.52, 0.40)],
    "up": [(0.16, 0.10), (0.20, 0.30), (0.22, 0.48), (0.24, 0.65)],
    "tucked": [(0.16, 0.10), (0.16, 0.24), (0.04, 0.26), (-0.08, 0.24)],
    "pinch": [(0.16, 0.10), (0.28, 0.20), (0.31, 0.29), (0.31, 0.37)],
}


def _finger_chain(name: str, extended: bool, fan: dict[str, float]) -> list[np.ndarray]:
    mcp = _FINGER_MCPS[name]
    d = np.array([math.cos(math.radians(fan[name])), math.sin(math.radians(fan[name]))])
    if extended:
        return [mcp, mcp + 0.22 * d, mcp + 0.38 * d, mcp + 0.52 * d]
    # Tight curl: the tip folds back past the knuckle toward the palm.
    return [mcp, mcp + 0.10 * d, mcp + 0.02 * d, mcp - 0.08 * d]


def _okay_index_chain() -> list[np.ndarray]:
    # Index curled down to meet the thumb tip in a ring.
    mcp = _FINGER_MCPS["index"]
    return [mcp, mcp + np.array([0.07, 0.13]), np.array([0.33, 0.46]), np.array([0.31, 0.38])]


def _build_template(thumb: str, fingers: dict[str, bool],
                    fan: dict[str, float], okay_index: bool = False) -> np.ndarray:
    pts = [np.zeros(2)]  # wrist
    pts.extend(np.asarray(p, dtype=float) for p in _THUMB_SHAPES[thumb])
    for name in ("index", "middle", "ring", "pinky"):
        if okay_index and name == "index":
            pts.extend(_okay_index_chain())
        else:
            pts.extend(_finger_chain(name, fingers[name], fan))
    arr = np.array(pts, dtype=float)
    arr[:, 1] = -arr[:, 1]  # palm frame y-up -> screen y-down
    radius = np.max(np.linalg.norm(arr, axis=1))
    return arr / radius


def _ext(index=False, middle=False, ring=False, pinky=False) -> dict[str, bool]:
    return {"index": index, "middle": middle, "ring": ring, "pinky": pinky}


GESTURE_TEMPLATES: dict[GestureLabel, np.ndarray] = {
    GestureLabel.ONE: _build_template("tucked", _ext(index=True), _TIGHT_FAN),
    GestureLabel.TWO: _build_template(
        "tucked", _ext(index=True, middle=True),
        {**_TIGHT_FAN, "index": 72.0, "middle": 97.0}),
    GestureLabel.THREE: _build_template(
        "tucked", _ext(index=True, middle=True, ring=True),
        {**_TIGHT_FAN, "index": 76.0, "ring": 104.0}),
    GestureLabel.FOUR: _build_template(
        "tucked", _ext(index=True, middle=True, ring=True, pinky=True), _TIGHT_FAN),
    GestureLabel.FIVE: _build_template(
        "out", _ext(index=True, middle=True, ring=True, pinky=True), _SPREAD_FAN),
    GestureLabel.OKAY: _build_template(
        "pinch", _ext(middle=True, ring=True, pinky=True), _TIGHT_FAN, okay_index=True),
    GestureLabel.ROCK: _build_template(
        "tucked", _ext(index=True, pinky=True),
        {**_TIGHT_FAN, "index": 76.0, "pinky": 108.0}),
    GestureLabel.THUMBS_UP: _build_template("up", _ext(), _TIGHT_FAN),
}


def gesture_template(label: GestureLabel) -> np.ndarray:
    """Canonical (21, 2) screen-space landmarks for a gesture, max radius 1."""
    return GESTURE_TEMPLATES[GestureLabel(label)].copy()


# ---------------------------------------------------------------------------
# Feature normalization.
# ---------------------------------------------------------------------------

def normalize_features(values: np.ndarray) -> np.ndarray:
    """Wrist-centre and unit-scale one 42-vector (or (21, 2) array).

    Idempotent: already-normalized input passes through unchanged.
    Raises DegenerateSample when every landmark coincides with the wrist.
    """
    pts = np.asarray(values, dtype=float).reshape(21, 2)
    pts = pts - pts[0]
    radius = np.max(np.linalg.norm(pts, axis=1))
    if radius < 1e-12:
        raise DegenerateSample("all landmarks coincide")
    return (pts / radius).ravel()


def normalize_batch(features: np.ndarray) -> np.ndarray:
    """Vectorized normalize_features over an (N, 42) array."""
    pts = np.asarray(features, dtype=float).reshape(-1, 21, 2)
    pts = pts - pts[:, :1, :]
    radius = np.max(np.linalg.norm(pts, axis=2), axis=1)
    if np.any(radius < 1e-12):
        raise DegenerateSample("sample with all landmarks coincident")
    return (pts / radius[:, None, None]).reshape(-1, FEATURE_DIM)


def features_from_landmarks(landmarks: np.ndarray, handedness: str = "right") -> np.ndarray:
    """Raw 42-vector from (21, >=2) landmarks; left hands are mirrored in x."""
    pts = np.asarray(landmarks, dtype=float)[:, :2].copy()
    if handedness == "left":
        pts[:, 0] = -pts[:, 0]
    return pts.ravel()


# ---------------------------------------------------------------------------
# Datasets.
# ---------------------------------------------------------------------------

@dataclass
class GestureDataset:
    """A bag of (feature, label) samples with an optional split tag."""

    features: np.ndarray  # (N, 42) float
    labels: np.ndarray    # (N,) int in 0..7
    split: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float).reshape(-1, FEATURE_DIM)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels disagree in length")

    def __len__(self) -> int:
        return len(self.labels)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=NUM_CLASSES)


def generate_dataset(seed: int, samples_per_class: int = 1000) -> GestureDataset:
    """Procedural gesture corpus: perturbed copies of the 8 templates.

    Per sample: Gaussian landmark jitter (sigma 2% of hand size), a
    rotation within +-25 degrees about the wrist, uniform scale in
    [0.5, 1.5] and a translation within +-1.  Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    feats = np.empty((NUM_CLASSES * samples_per_class, FEATURE_DIM))
    labels = np.empty(NUM_CLASSES * samples_per_class, dtype=np.int64)
    row = 0
    for label in GestureLabel:
        template = GESTURE_TEMPLATES[label]
        for _ in range(samples_per_class):
            pts = template + rng.normal(0.0, JITTER_SIGMA, size=(21, 2))
            angle = rng.uniform(-ROTATION_LIMIT, ROTATION_LIMIT)
            scale = rng.uniform(*SCALE_RANGE)
            shift = rng.uniform(-TRANSLATION_RANGE, TRANSLATION_RANGE, size=2)
            ca, sa = math.cos(angle), math.sin(angle)
            rot = np.array([[ca, -sa], [sa, ca]])
            feats[row] = ((pts @ rot.T) * scale + shift).ravel()
            labels[row] = int(label)
            row += 1
    return GestureDataset(feats, labels)


def split_dataset(dataset: GestureDataset, train_fraction: float = 0.8,
                  seed: int = 0) -> tuple[GestureDataset, GestureDataset]:
    """Stratified train/test split; each class is divided by train_fraction."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in np.unique(dataset.labels):
        idx = np.flatnonzero(dataset.labels == label)
        idx = rng.permutation(idx)
        cut = int(round(len(idx) * train_fraction))
        train_idx.extend(idx[:cut])
        test_idx.extend(idx[cut:])
    train_idx = np.array(sorted(train_idx), dtype=np.int64)
    test_idx = np.array(sorted(test_idx), dtype=np.int64)
    return (
        GestureDataset(dataset.features[train_idx], dataset.labels[train_idx], split="train"),
        GestureDataset(dataset.features[test_idx], dataset.labels[test_idx], split="test"),
    )


def save_dataset(dataset: GestureDataset, path) -> None:
    """One sample per line: 42 comma-separated reals, ';', class index."""
    with open(path, "w", encoding="ascii") as fh:
        for feat, label in zip(dataset.features, dataset.labels):
            fh.write(",".join(repr(float(v)) for v in feat))
            fh.write(f";{int(label)}\n")


def load_dataset(path, split: str = "") -> GestureDataset:
    feats, labels = [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values, _, label = line.partition(";")
                feat = [float(v) for v in values.split(",")]
                label = int(label)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if len(feat) != FEATURE_DIM:
                raise FormatError(f"{path}:{lineno}: expected {FEATURE_DIM} values, got {len(feat)}")
            if not 0 <= label < NUM_CLASSES:
                raise FormatError(f"{path}:{lineno}: label {label} out of range")
            feats.append(feat)
            labels.append(label)
    return GestureDataset(np.array(feats, dtype=float).reshape(-1, FEATURE_DIM),
                          np.array(labels, dtype=np.int64), split=split)
