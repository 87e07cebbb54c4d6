"""Occlusion attribution: hide image patches and measure prediction shifts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PatchTooLarge, ViewKindMismatch
from ..features import DatasetView
from ..models import FittedModel


@dataclass(frozen=True)
class AttributionMap:
    values: np.ndarray     # (nlat, nlon) mean |delta| (or signed delta) per cell
    patch: int
    stride: int
    baseline: float
    absolute: bool


def _positions(extent: int, patch: int, stride: int) -> list[int]:
    pos = list(range(0, extent - patch + 1, stride))
    if pos[-1] != extent - patch:
        pos.append(extent - patch)   # cover the trailing edge
    return pos


def occlusion_map(fitted: FittedModel, view: DatasetView, row: int,
                  patch: int = 5, stride: int = 2, baseline: float = 0.0,
                  absolute: bool = True, batch: int = 64) -> AttributionMap:
    """Per-cell prediction change when the covering patches are blanked out.

    Every placement replaces the patch across all channels with `baseline`;
    cells covered by several placements get the average of their deltas.
    """
    if view.kind != "Image":
        raise ViewKindMismatch("occlusion maps need an Image view")
    img = np.asarray(view.X_img[row], dtype=np.float64)
    scalars = np.asarray(view.X_scalar[row], dtype=np.float64)
    _, h, w = img.shape
    if patch < 1 or stride < 1:
        raise ValueError(f"patch and stride must be >= 1, got {patch}, {stride}")
    if patch > h or patch > w:
        raise PatchTooLarge(f"patch {patch} exceeds grid {h}x{w}")
    base_pred = float(fitted.model.predict(img[None], scalars[None])[0])
    placements = [(i, j) for i in _positions(h, patch, stride)
                  for j in _positions(w, patch, stride)]
    deltas = np.empty(len(placements), dtype=np.float64)
    for lo in range(0, len(placements), batch):
        chunk = placements[lo:lo + batch]
        occluded = np.repeat(img[None], len(chunk), axis=0)
        for k, (i, j) in enumerate(chunk):
            occluded[k, :, i:i + patch, j:j + patch] = baseline
        preds = fitted.model.predict(
            occluded, np.repeat(scalars[None], len(chunk), axis=0))
        deltas[lo:lo + len(chunk)] = preds - base_pred
    if absolute:
        deltas = np.abs(deltas)
    total = np.zeros((h, w), dtype=np.float64)
    count = np.zeros((h, w), dtype=np.float64)
    for (i, j), d in zip(placements, deltas):
        total[i:i + patch, j:j + patch] += d
        count[i:i + patch, j:j + patch] += 1.0
    return AttributionMap(values=total / count, patch=patch, stride=stride,
                          baseline=baseline, absolute=absolute)
