"""Offline and real-time signal path for the synthetic EEG stream.

Offline analysis resamples 1000 Hz recordings to 250 Hz, band-pass filters
2-50 Hz with zero phase, cuts 400 ms epochs and estimates band powers from
Welch spectra. The real-time path used by the conflict decoder runs the same
band-pass forward-only (causal) on raw 1.2 s buffers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

BAND_EDGES = {
    "delta": (2.0, 4.0),
    "theta": (4.0, 7.0),
    "alpha": (8.0, 12.0),
    "beta": (13.0, 30.0),
}

BAND_LOW = 2.0
BAND_HIGH = 50.0
FILTER_ORDER = 4  # scipy design order; yields a cascade of 4 biquads

RESAMPLE_FACTOR = 4
_FIR_TAPS = 127


@dataclass
class EEGEpoch:
    data: np.ndarray  # channels x samples, microvolts
    sample_rate: float
    event_tag: str = ""
    event_time: float = 0.0

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        if not np.all(np.isfinite(self.data)):
            raise ValueError("epoch data must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass
class PSDSpectrum:
    frequencies: np.ndarray
    power: np.ndarray  # channels x frequencies

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=np.float64)
        self.power = np.atleast_2d(np.asarray(self.power, dtype=np.float64))
        if np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if self.frequencies[0] < 0:
            raise ValueError("frequencies must be non-negative")
        if self.power.shape[1] != self.frequencies.shape[0]:
            raise ValueError("power grid does not match frequencies")


@dataclass
class BandPowers:
    delta: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        arrays = [np.atleast_1d(np.asarray(getattr(self, k), dtype=np.float64))
                  for k in BAND_EDGES]
        if len({a.shape for a in arrays}) != 1:
            raise ValueError("band arrays must share one shape")
        self.delta, self.theta, self.alpha, self.beta = arrays

    def as_matrix(self) -> np.ndarray:
        """bands x channels, in BAND_EDGES order."""
        return np.stack([getattr(self, k) for k in BAND_EDGES])


def _bandpass_sos(sample_rate: float):
    if sample_rate <= 2 * BAND_HIGH:
        raise ValueError(f"sample_rate must exceed {2 * BAND_HIGH} Hz")
    return sps.butter(FILTER_ORDER, [BAND_LOW, BAND_HIGH], btype="bandpass",
                      fs=sample_rate, output="sos")


def bandpass_2_50(data, sample_rate: float, zero_phase: bool = True) -> np.ndarray:
    """2-50 Hz Butterworth band-pass along the last axis.

    zero_phase=True runs forward-backward (offline, no group delay);
    zero_phase=False is the causal real-time path.
    """
    data = np.asarray(data, dtype=np.float64)
    sos = _bandpass_sos(sample_rate)
    if zero_phase:
        return sps.sosfiltfilt(sos, data, axis=-1)
    return sps.sosfilt(sos, data, axis=-1)


def _antialias_taps() -> np.ndarray:
    # unity-DC FIR low-pass (normalized taps) so constants survive decimation
    taps = sps.firwin(_FIR_TAPS, 0.2, fs=1.0)
    return taps / taps.sum()


_TAPS = _antialias_taps()


def resample_1000_250(data) -> np.ndarray:
    """Anti-alias low-pass then keep every 4th sample (1000 Hz -> 250 Hz).

    Odd lengths are edge-padded to a multiple of 4 and the output trimmed to
    ceil(len / 4). Works on 1-D signals or channels x samples arrays.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise ValueError("empty input")
    single = data.ndim == 1
    rows = np.atleast_2d(data)
    n = rows.shape[1]
    pad_to = (-n) % RESAMPLE_FACTOR
    out_len = int(np.ceil(n / RESAMPLE_FACTOR))
    half = _FIR_TAPS // 2
    padded = np.pad(rows, ((0, 0), (half, half + pad_to)), mode="edge")
    out = np.empty((rows.shape[0], out_len))
    for c in range(rows.shape[0]):
        smooth = np.convolve(padded[c], _TAPS, mode="valid")
        out[c] = smooth[: n + pad_to : RESAMPLE_FACTOR][:out_len]
    return out[0] if single else out


def extract_epoch(data, sample_rate: float, event_time: float, span: float,
                  event_tag: str = "") -> EEGEpoch:
    """Cut round(span * sample_rate) samples starting at the event marker."""
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if span <= 0:
        raise ValueError("span must be positive")
    start = int(round(event_time * sample_rate))
    count = int(round(span * sample_rate))
    if start < 0 or start + count > data.shape[1]:
        raise ValueError(
            f"epoch [{event_time:.3f}s, +{span:.3f}s) lies outside the recording"
        )
    return EEGEpoch(data[:, start : start + count].copy(), sample_rate,
                    event_tag=event_tag, event_time=event_time)


def welch_psd(epoch: EEGEpoch, segment_length: int, overlap_fraction: float = 0.5,
              nfft: int | None = None) -> PSDSpectrum:
    """Hann-windowed averaged periodograms, one-sided density scaling.

    ``nfft`` may exceed ``segment_length`` to zero-pad short epochs onto a
    finer frequency grid (the 400 ms offline epochs use nfft=256).
    """
    if segment_length > epoch.n_samples:
        raise ValueError("segment_length must not exceed the epoch length")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    freqs, power = sps.welch(
        epoch.data, fs=epoch.sample_rate, window="hann",
        nperseg=segment_length, noverlap=int(segment_length * overlap_fraction),
        nfft=nfft, detrend="constant", scaling="density", axis=-1,
    )
    return PSDSpectrum(freqs, power)


def integrate_band(spectrum: PSDSpectrum, low: float, high: float) -> np.ndarray:
    """Trapezoidal band integral with linear interpolation at the exact edges.

    Interpolating the edges makes adjacent bands tile exactly: the integral
    over [a, b] plus [b, c] equals the integral over [a, c].
    """
    f = spectrum.frequencies
    if low < f[0] or high > f[-1]:
        raise ValueError(f"spectrum does not cover [{low}, {high}] Hz")
    inner = (f > low) & (f < high)
    grid = np.concatenate(([low], f[inner], [high]))
    out = np.empty(spectrum.power.shape[0])
    for c, row in enumerate(spectrum.power):
        vals = np.interp(grid, f, row)
        out[c] = np.trapezoid(vals, grid)
    return out


def band_powers(spectrum: PSDSpectrum) -> BandPowers:
    """Per-channel power integrals over the delta/theta/alpha/beta bands."""
    if spectrum.frequencies[0] > BAND_EDGES["delta"][0] or spectrum.frequencies[-1] < BAND_EDGES["beta"][1]:
        raise ValueError("spectrum must cover 2-30 Hz")
    return BandPowers(*(integrate_band(spectrum, lo, hi)
                        for lo, hi in BAND_EDGES.values()))


def baseline_subtract(condition, baseline):
    """Elementwise condition - baseline for matching PSDSpectrum or BandPowers."""
    if isinstance(condition, PSDSpectrum) and isinstance(baseline, PSDSpectrum):
        if condition.power.shape != baseline.power.shape or not np.array_equal(
                condition.frequencies, baseline.frequencies):
            raise ValueError("spectra must share shape and frequency grid")
        return PSDSpectrum(condition.frequencies.copy(),
                           condition.power - baseline.power)
    if isinstance(condition, BandPowers) and isinstance(baseline, BandPowers):
        if condition.delta.shape != baseline.delta.shape:
            raise ValueError("band powers must share channel counts")
        return BandPowers(*(getattr(condition, k) - getattr(baseline, k)
                            for k in BAND_EDGES))
    raise TypeError("condition and baseline must be the same kind")


def split_segments(items):
    """Contiguous thirds (T1, T2, T3); any remainder goes to the earliest thirds."""
    items = list(items)
    n = len(items)
    if n < 3:
        raise ValueError("need at least 3 items to split into thirds")
    base, rem = divmod(n, 3)
    sizes = [base + (1 if i < rem else 0) for i in range(3)]
    out, pos = [], 0
    for s in sizes:
        out.append(items[pos : pos + s])
        pos += s
    return tuple(out)


# -- exports: CSV and a compact binary block, both round-tripping ------------

EPOCH_MAGIC = "eegepoch-v1"
PSD_MAGIC = "eegpsd-v1"


def epoch_to_csv(epoch: EEGEpoch, fh) -> None:
    fh.write(f"# {EPOCH_MAGIC} sample_rate={epoch.sample_rate!r} "
             f"event_time={epoch.event_time!r} event_tag={epoch.event_tag}\n")
    fh.write("channel,sample,value\n")
    for c in range(epoch.n_channels):
        for s in range(epoch.n_samples):
            fh.write(f"{c},{s},{float(epoch.data[c, s])!r}\n")


def epoch_from_csv(fh) -> EEGEpoch:
    header = fh.readline().strip()
    if not header.startswith(f"# {EPOCH_MAGIC}"):
        raise ValueError("not an epoch CSV export")
    meta = dict(part.split("=", 1) for part in header.split()[2:])
    fh.readline()  # column header
    rows = [line.strip().split(",") for line in fh if line.strip()]
    n_ch = max(int(r[0]) for r in rows) + 1
    n_s = max(int(r[1]) for r in rows) + 1
    data = np.zeros((n_ch, n_s))
    for c, s, v in rows:
        data[int(c), int(s)] = float(v)
    return EEGEpoch(data, float(meta["sample_rate"]),
                    event_tag=meta.get("event_tag", ""),
                    event_time=float(meta["event_time"]))


def epoch_to_bin(epoch: EEGEpoch, path) -> None:
    with open(path, "wb") as fh:
        tag = epoch.event_tag.encode("utf-8")
        fh.write(f"{EPOCH_MAGIC} {epoch.n_channels} {epoch.n_samples} "
                 f"{epoch.sample_rate!r} {epoch.event_time!r} {len(tag)}\n".encode("ascii"))
        fh.write(tag)
        fh.write(np.ascontiguousarray(epoch.data).astype("<f8", copy=False).tobytes())


def epoch_from_bin(path) -> EEGEpoch:
    with open(path, "rb") as fh:
        head = fh.readline().decode("ascii").split()
        if head[0] != EPOCH_MAGIC:
            raise ValueError(f"{path}: not an {EPOCH_MAGIC} file")
        n_ch, n_s = int(head[1]), int(head[2])
        rate, ev_time, tag_len = float(head[3]), float(head[4]), int(head[5])
        tag = fh.read(tag_len).decode("utf-8")
        data = np.frombuffer(fh.read(n_ch * n_s * 8), dtype="<f8").reshape(n_ch, n_s)
    return EEGEpoch(data.copy(), rate, event_tag=tag, event_time=ev_time)


def psd_to_csv(spectrum: PSDSpectrum, fh) -> None:
    fh.write(f"# {PSD_MAGIC}\n")
    fh.write("channel,frequency,value\n")
    for c in range(spectrum.power.shape[0]):
        for i, f in enumerate(spectrum.frequencies):
            fh.write(f"{c},{float(f)!r},{float(spectrum.power[c, i])!r}\n")


def psd_from_csv(fh) -> PSDSpectrum:
    if not fh.readline().startswith(f"# {PSD_MAGIC}"):
        raise ValueError("not a PSD CSV export")
    fh.readline()
    chans: dict[int, dict[float, float]] = {}
    for line in fh:
        if not line.strip():
            continue
        c, f, v = line.strip().split(",")
        chans.setdefault(int(c), {})[float(f)] = float(v)
    freqs = np.array(sorted(next(iter(chans.values())).keys()))
    power = np.array([[chans[c][f] for f in freqs] for c in sorted(chans)])
    return PSDSpectrum(freqs, power)


def bands_to_csv(bands: BandPowers, fh) -> None:
    fh.write("channel,band,value\n")
    for name in BAND_EDGES:
        arr = getattr(bands, name)
        for c, v in enumerate(arr):
            fh.write(f"{c},{name},{float(v)!r}\n")


def bands_from_csv(fh) -> BandPowers:
    fh.readline()
    cols: dict[str, dict[int, float]] = {k: {} for k in BAND_EDGES}
    for line in fh:
        if not line.strip():
            continue
        c, name, v = line.strip().split(",")
        cols[name][int(c)] = float(v)
    n = max(max(d) for d in cols.values()) + 1
    return BandPowers(*(np.array([cols[k][c] for c in range(n)]) for k in BAND_EDGES))


def csv_round_trip_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and np.array_equal(a, b)


def _csv_string(writer, obj) -> str:
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()
