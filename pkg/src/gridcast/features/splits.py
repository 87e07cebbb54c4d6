"""Chronological train/validation/test splitting for daily datasets."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from ..errors import MisalignedDay, WindowOutOfRange
from ..gridstore import DAILY, TimeAxis


@dataclass(frozen=True)
class SplitSpec:
    """Inclusive end dates of the train, validation, and test windows."""
    train_end: date
    val_end: date
    test_end: date

    def __post_init__(self):
        if not self.train_end < self.val_end < self.test_end:
            raise ValueError(
                f"split boundaries must increase: {self.train_end} < "
                f"{self.val_end} < {self.test_end} fails")


def default_split() -> SplitSpec:
    """Train through 2021, validate on 2022, test on 2023."""
    return SplitSpec(train_end=date(2021, 12, 31), val_end=date(2022, 12, 31),
                     test_end=date(2023, 12, 31))


def make_chronological_split(time: TimeAxis, spec: SplitSpec
                             ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index sets (train, val, test) covering every day in the axis.

    Days up to train_end train, days up to val_end validate, days up to
    test_end test. The axis must not extend past test_end and each window
    must contain at least one day.
    """
    if time.dt != DAILY:
        raise MisalignedDay(f"need a daily axis, got dt={time.dt}s")
    days = time.dates()
    bounds = [np.datetime64(d.isoformat()) for d in
              (spec.train_end, spec.val_end, spec.test_end)]
    if days[-1] > bounds[2]:
        raise WindowOutOfRange(f"data runs to {days[-1]}, past test_end {spec.test_end}")
    idx = np.arange(time.nt)
    train = idx[days <= bounds[0]]
    val = idx[(days > bounds[0]) & (days <= bounds[1])]
    test = idx[(days > bounds[1]) & (days <= bounds[2])]
    for name, part in (("train", train), ("validation", val), ("test", test)):
        if len(part) == 0:
            raise WindowOutOfRange(f"{name} window contains no data")
    return train, val, test
