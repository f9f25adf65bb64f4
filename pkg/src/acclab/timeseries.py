"""Sampled process curves: the common result container of every lab engine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ChannelError(KeyError):
    """Requested channel does not exist in the series."""


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly ordered samples of one or more named channels.

    ``times`` holds the abscissa (seconds for transients, meters for
    beam-envelope curves); ``channels`` maps a label to a vector of the
    same length; ``units`` maps every label to its unit string.
    """

    times: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    units: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.ndim != 1 or times.size < 1:
            raise ValueError("times must be a non-empty 1-D vector")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        object.__setattr__(self, "channels", channels)
        for label, values in channels.items():
            if values.shape != times.shape:
                raise ValueError(
                    f"channel {label!r} has {values.size} samples, expected {times.size}"
                )
            if label not in self.units:
                raise ValueError(f"channel {label!r} has no unit entry")

    @property
    def labels(self) -> list[str]:
        return list(self.channels)

    def channel(self, label: str) -> np.ndarray:
        try:
            return self.channels[label]
        except KeyError:
            raise ChannelError(label) from None

    def select(self, labels: list[str]) -> "TimeSeries":
        """Subset and reorder channels; unknown labels raise ChannelError."""
        return TimeSeries(
            times=self.times,
            channels={lab: self.channel(lab) for lab in labels},
            units={lab: self.units[lab] for lab in labels},
        )

    def to_csv(self) -> str:
        r"""Render as delimited text: header ``t,<channel>[unit],...``, ``\n``
        line endings, shortest round-trip float formatting."""
        header = "t," + ",".join(f"{lab}[{self.units[lab]}]" for lab in self.channels)
        columns = [self.times] + [self.channels[lab] for lab in self.channels]
        lines = [header]
        for row in zip(*columns):
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_doc(self) -> dict:
        """Plain-data form used on the wire and in the event log."""
        return {
            "times": [float(v) for v in self.times],
            "channels": {k: [float(v) for v in vec] for k, vec in self.channels.items()},
            "units": dict(self.units),
        }

    @staticmethod
    def from_doc(doc: dict) -> "TimeSeries":
        return TimeSeries(
            times=np.asarray(doc["times"], dtype=float),
            channels={k: np.asarray(v, dtype=float) for k, v in doc["channels"].items()},
            units=dict(doc["units"]),
        )


def sample_at(series: TimeSeries, channel: str, t: float) -> float:
    """Linearly interpolate ``channel`` at abscissa ``t``.

    Exact at the sample points; raises outside [first, last].
    """
    values = series.channel(channel)
    times = series.times
    if not (times[0] <= t <= times[-1]):
        raise ValueError(
            f"t={t} outside sampled range [{times[0]}, {times[-1]}]"
        )
    i = int(np.searchsorted(times, t))
    if times[i] == t:
        return float(values[i])
    lo, hi = i - 1, i
    frac = (t - times[lo]) / (times[hi] - times[lo])
    return float(values[lo] + frac * (values[hi] - values[lo]))
