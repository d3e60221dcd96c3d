"""Temporal preprocessing: bandpass filtering, decimation, epoching.

The chain mirrors standard offline ERP processing: a causal order-4
Butterworth bandpass (1-12.5 Hz by default), pure subsampling down to
25 Hz (the 12.5 Hz band edge is exactly the new Nyquist, so the bandpass
doubles as the anti-alias filter), and fixed 0.6 s post-stimulus epochs.

Filtering is forward-only with zero initial conditions; the group delay
is accepted rather than compensated, matching what an online system
would see.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import PipelineError, ValidationError
from .scheduler import FLASH, StimulusEvent

DEFAULT_CHANNELS = ("O1", "O2", "P3", "P4", "P7", "P8", "Pz", "FCz")


@dataclass
class Recording:
    """Multichannel sample matrix plus the stimulus events aligned to it.

    ``samples`` is T x C (rows = time, columns = channels), in microvolts.
    """

    fs_hz: float
    samples: np.ndarray
    channel_names: tuple[str, ...] = DEFAULT_CHANNELS
    events: list[StimulusEvent] = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1 or self.samples.shape[1] < 1:
            raise ValidationError("samples must be a non-empty T x C matrix")
        if len(self.channel_names) != self.samples.shape[1]:
            raise ValidationError(
                f"{self.samples.shape[1]} channels but "
                f"{len(self.channel_names)} channel names"
            )
        duration = self.samples.shape[0] / self.fs_hz
        for e in self.events:
            if not 0.0 <= e.onset_s <= duration:
                raise ValidationError(
                    f"event at {e.onset_s}s lies outside the recording (0..{duration:.3f}s)"
                )

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.fs_hz

    def sample_index(self, onset_s: float) -> int:
        """Nearest sample index for a time in seconds."""
        return int(round(onset_s * self.fs_hz))


@dataclass(frozen=True)
class FilterSpec:
    """Realized bandpass design (cascaded second-order sections)."""

    order: int
    low_hz: float
    high_hz: float
    fs_hz: float
    sos: np.ndarray


@dataclass
class EpochSet:
    """Per-flash feature rows: E x (L*K), channel-major concatenation."""

    epochs: np.ndarray
    labels: np.ndarray
    window_s: float
    n_samples: int  # L, samples per window
    n_channels: int  # K


def design_bandpass(
    fs_hz: float, low_hz: float = 1.0, high_hz: float = 12.5, order: int = 4
) -> FilterSpec:
    """Digital Butterworth bandpass via the bilinear transform.

    ``order`` is the analog prototype order (the conventional argument of
    butter()), so the realized filter has 2*order poles.  Band edges are
    prewarped and land at -3 dB.
    """
    if not 0 < low_hz < high_hz:
        raise ValidationError("need 0 < low_hz < high_hz")
    if high_hz >= fs_hz / 2:
        raise ValidationError(
            f"high band edge {high_hz} Hz is at or above Nyquist ({fs_hz / 2} Hz)"
        )
    sos = signal.butter(order, [low_hz, high_hz], btype="bandpass", output="sos", fs=fs_hz)
    for section in sos:
        poles = np.roots(section[3:])
        if np.any(np.abs(poles) >= 1.0):
            raise PipelineError("designed filter is unstable (pole on or outside unit circle)")
    return FilterSpec(order=order, low_hz=low_hz, high_hz=high_hz, fs_hz=fs_hz, sos=sos)


def frequency_response(spec: FilterSpec, freqs_hz) -> np.ndarray:
    """Complex response of the realized filter at the given frequencies."""
    _, h = signal.sosfreqz(spec.sos, worN=np.atleast_1d(freqs_hz), fs=spec.fs_hz)
    return h


def filter_recording(spec: FilterSpec, rec: Recording) -> Recording:
    """Causal forward filtering, channel by channel, zero initial state."""
    if spec.fs_hz != rec.fs_hz:
        raise ValidationError(
            f"filter designed for {spec.fs_hz} Hz, recording is {rec.fs_hz} Hz"
        )
    filtered = signal.sosfilt(spec.sos, rec.samples, axis=0)
    return Recording(
        fs_hz=rec.fs_hz,
        samples=filtered,
        channel_names=rec.channel_names,
        events=list(rec.events),
    )


def decimate(rec: Recording, fs_out: float) -> Recording:
    """Keep every (fs_in/fs_out)-th sample starting at index 0.

    The input must already be lowpassed at or below fs_out/2; no extra
    anti-alias filter is applied.  Event times are untouched (they live in
    seconds); their sample indices on the new clock come from
    nearest-sample rounding at use time.
    """
    factor = rec.fs_hz / fs_out
    if abs(factor - round(factor)) > 1e-9 or factor < 1:
        raise ValidationError(
            f"sampling rate {rec.fs_hz} Hz is not an integer multiple of {fs_out} Hz"
        )
    factor = int(round(factor))
    return Recording(
        fs_hz=fs_out,
        samples=rec.samples[::factor].copy(),
        channel_names=rec.channel_names,
        events=list(rec.events),
    )


def extract_epochs(rec: Recording, window_s: float = 0.6) -> EpochSet:
    """One feature row per flash event: ``window_s`` of signal from onset.

    Rows concatenate channels channel-major (all of channel 1's samples,
    then channel 2's, ...).  Pause events are skipped; labels carry the
    events' is_target flags.
    """
    length = int(round(window_s * rec.fs_hz))
    if length < 1:
        raise ValidationError(f"window {window_s}s is shorter than one sample")
    flashes = [e for e in rec.events if e.kind == FLASH]
    rows = np.empty((len(flashes), length * rec.n_channels))
    labels = np.empty(len(flashes), dtype=bool)
    for i, ev in enumerate(flashes):
        start = rec.sample_index(ev.onset_s)
        if start < 0 or start + length > rec.n_samples:
            raise PipelineError(
                f"epoch truncated for flash at {ev.onset_s:.3f}s "
                f"(char {ev.char_index}, rep {ev.repetition}): "
                f"needs samples [{start}, {start + length}) of {rec.n_samples}"
            )
        rows[i] = rec.samples[start : start + length].T.ravel()
        labels[i] = ev.is_target
    return EpochSet(
        epochs=rows,
        labels=labels,
        window_s=window_s,
        n_samples=length,
        n_channels=rec.n_channels,
    )
