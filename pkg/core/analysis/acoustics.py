"""
Audio side of the analysis: synthesis, amplitude demodulation, envelope scalograms.

Chain per piece: synthesize → zscore → demodulate → decimate_envelope → scalogram,
with carrier_spectrum taken from the full-rate decomposition.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import numpy as np
from scipy import fft, signal
from scipy.io import wavfile

from ..errors import AcousticsError, CutoffTooHigh, EmptyPiece, EnvelopeInvariantError, TooShort, ZeroVariance
from ..schema.core_schema import EnvelopeDecomposition, Piece, Scalogram, Spectrum, Waveform

logger = logging.getLogger(__name__)

ATTACK_SEC = 0.010
DECAY_TAU_SEC = 0.3
RELEASE_SEC = 0.050
EPSILON = 1e-6
MAX_OUT_OF_BAND = 0.05
MORLET_W0 = 6.0
FILTER_ORDER = 4


# ============================================================================
# SYNTHESIS
# ============================================================================

def note_frequency(pitch: int) -> float:
    return 440.0 * 2.0 ** ((pitch - 69) / 12.0)


def synthesize(piece: Piece, sample_rate: int = 16000) -> Waveform:
    """Additive sine rendering with a 10 ms attack and 0.3 s exponential decay, peak-normalized."""
    if not piece.events:
        raise EmptyPiece(f"{piece.id}: nothing to synthesize")
    end = max(e.onset + e.duration for e in piece.events) + RELEASE_SEC
    out = np.zeros(int(np.ceil(end * sample_rate)) + 1)
    for event in piece.events:
        start = int(round(event.onset * sample_rate))
        length = int(round((event.duration + RELEASE_SEC) * sample_rate))
        t = np.arange(length) / sample_rate
        amplitude = np.minimum(t / ATTACK_SEC, 1.0) * np.exp(-t / DECAY_TAU_SEC)
        tone = amplitude * np.sin(2.0 * np.pi * note_frequency(event.pitch) * t)
        stop = min(start + length, len(out))
        out[start:stop] += tone[: stop - start]
    peak = np.max(np.abs(out))
    if peak > 0:
        out /= peak
    return Waveform(sample_rate=sample_rate, samples=out)


def zscore(wave: Waveform) -> Waveform:
    """Mean 0, population SD 1."""
    x = wave.samples
    if len(x) < 2:
        raise ZeroVariance("need at least 2 samples")
    sd = np.std(x)
    if sd == 0:
        raise ZeroVariance("signal is constant")
    return Waveform(sample_rate=wave.sample_rate, samples=(x - np.mean(x)) / sd)


# ============================================================================
# DEMODULATION
# ============================================================================

def _lowpass(x: np.ndarray, cutoff: float, sample_rate: float) -> np.ndarray:
    sos = signal.butter(FILTER_ORDER, cutoff, btype="low", fs=sample_rate, output="sos")
    return signal.sosfiltfilt(sos, x)


def out_of_band_fraction(envelope: np.ndarray, cutoff: float, sample_rate: float) -> float:
    """Share of envelope spectral power above the cutoff."""
    power = np.abs(np.fft.rfft(envelope)) ** 2
    freqs = np.fft.rfftfreq(len(envelope), d=1.0 / sample_rate)
    total = power.sum()
    return float(power[freqs > cutoff].sum() / total) if total > 0 else 0.0


def check_envelope(decomposition: EnvelopeDecomposition) -> None:
    """Raise EnvelopeInvariantError when the envelope is negative or not band-limited."""
    env = decomposition.envelope
    if len(env) and env.min() < 0:
        raise EnvelopeInvariantError(f"envelope has negative values (min {env.min():.3g})")
    fraction = out_of_band_fraction(env, decomposition.cutoff, decomposition.sample_rate)
    if fraction > MAX_OUT_OF_BAND:
        raise EnvelopeInvariantError(
            f"{fraction:.1%} of envelope power above {decomposition.cutoff} Hz"
        )


def demodulate(wave: Waveform, cutoff: float = 40.0, iterations: int = 10) -> EnvelopeDecomposition:
    """
    Split a signal into a non-negative modulator below `cutoff` and a carrier.

    Starts from the low-passed analytic magnitude, then repeats: clip at EPSILON, low-pass,
    rescale so envelope * cos(analytic phase) fits the signal in least squares.
    carrier = signal / max(envelope, EPSILON).

    Raises:
        CutoffTooHigh: sample_rate <= 2 * cutoff
    """
    if wave.sample_rate <= 2 * cutoff:
        raise CutoffTooHigh(f"cutoff {cutoff} Hz needs a sample rate above {2 * cutoff} Hz")
    x = wave.samples
    analytic = signal.hilbert(x, N=fft.next_fast_len(len(x)))[: len(x)]
    phase_carrier = np.cos(np.angle(analytic))
    env = _lowpass(np.abs(analytic), cutoff, wave.sample_rate)
    for _ in range(iterations):
        env = np.maximum(env, EPSILON)
        env = _lowpass(env, cutoff, wave.sample_rate)
        model = env * phase_carrier
        denom = np.dot(model, model)
        if denom > 0:
            env = env * (np.dot(model, x) / denom)
    env = np.maximum(env, EPSILON)
    carrier = x / np.maximum(env, EPSILON)
    return EnvelopeDecomposition(envelope=env, carrier=carrier, cutoff=cutoff, sample_rate=wave.sample_rate)


def decimate_envelope(decomposition: EnvelopeDecomposition, frame_rate: float = 200.0) -> EnvelopeDecomposition:
    """Envelope resampled to frame_rate (carrier dropped)."""
    if frame_rate <= 2 * decomposition.cutoff:
        raise CutoffTooHigh(f"frame rate {frame_rate} Hz cannot hold a {decomposition.cutoff} Hz envelope")
    ratio = Fraction(frame_rate / decomposition.sample_rate).limit_denominator(1000)
    env = signal.resample_poly(decomposition.envelope, ratio.numerator, ratio.denominator)
    return EnvelopeDecomposition(
        envelope=np.maximum(env, 0.0),
        cutoff=decomposition.cutoff,
        sample_rate=decomposition.sample_rate * ratio.numerator / ratio.denominator,
    )


# ============================================================================
# SCALOGRAM
# ============================================================================

def band_frequencies(fmin: float = 0.1, fmax: float = 40.0, n_bands: int = 24) -> np.ndarray:
    return np.geomspace(fmin, fmax, n_bands)


def morlet_scale(frequency: np.ndarray, w0: float = MORLET_W0) -> np.ndarray:
    """Morlet scale whose daughter wavelet peaks at `frequency` (s * omega = w0)."""
    return w0 / (2.0 * np.pi * frequency)


def scalogram(
    decomposition: EnvelopeDecomposition,
    fmin: float = 0.1,
    fmax: float = 40.0,
    n_bands: int = 24,
) -> Scalogram:
    """
    Morlet (w0 = 6) wavelet power of the demeaned envelope on log-spaced bands,
    computed band by band in the frequency domain.

    Raises:
        TooShort: the envelope is shorter than one period of the lowest band
    """
    env = np.asarray(decomposition.envelope, dtype=float)
    dt = 1.0 / decomposition.sample_rate
    n = len(env)
    if n * dt < 1.0 / fmin:
        raise TooShort(f"{n * dt:.3g} s envelope is shorter than one {fmin} Hz period")

    freqs = band_frequencies(fmin, fmax, n_bands)
    scales = morlet_scale(freqs)
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
    spectrum = np.fft.fft(env - env.mean())
    power = np.empty((n_bands, n))
    positive = omega > 0
    for i, s in enumerate(scales):
        daughter = np.zeros(n)
        daughter[positive] = (
            np.sqrt(2.0 * np.pi * s / dt) * np.pi ** -0.25 * np.exp(-((s * omega[positive] - MORLET_W0) ** 2) / 2.0)
        )
        power[i] = np.abs(np.fft.ifft(spectrum * daughter)) ** 2
    return Scalogram(frequencies=freqs, power=power, frame_rate=decomposition.sample_rate)


def mean_power_by_group(
    band_means: Mapping[str, np.ndarray],
    labels: Mapping[str, str],
    groups: Optional[List[str]] = None,
    warnings: Optional[List[str]] = None,
) -> Dict[str, np.ndarray]:
    """
    Unweighted mean over pieces of per-piece band means, per group label.

    `groups` lists labels to report; those with no pieces are dropped with a warning.
    """
    members: Dict[str, List[np.ndarray]] = {}
    for piece_id in sorted(band_means):
        if piece_id in labels:
            members.setdefault(labels[piece_id], []).append(np.asarray(band_means[piece_id], dtype=float))
    out: Dict[str, np.ndarray] = {}
    for group in sorted(set(groups or []) | set(members)):
        if not members.get(group):
            message = f"group {group!r} has no pieces, dropped"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            continue
        out[group] = np.mean(np.vstack(members[group]), axis=0)
    return out


# ============================================================================
# SPECTRA
# ============================================================================

def carrier_spectrum(decomposition: EnvelopeDecomposition, nperseg: int = 4096) -> Spectrum:
    """Welch power spectrum of the carrier."""
    carrier = decomposition.carrier
    if len(carrier) == 0:
        raise AcousticsError("decomposition has no carrier")
    freqs, power = signal.welch(carrier, fs=decomposition.sample_rate, nperseg=min(nperseg, len(carrier)))
    return Spectrum(frequencies=freqs, power=power)


def spectral_slope(frequencies: np.ndarray, power: np.ndarray) -> float:
    """Least-squares slope of log10 power against log10 frequency (bands with positive power)."""
    f = np.asarray(frequencies, dtype=float)
    p = np.asarray(power, dtype=float)
    mask = (f > 0) & (p > 0)
    if mask.sum() < 2:
        raise AcousticsError("need at least 2 bands with positive power")
    slope, _ = np.polyfit(np.log10(f[mask]), np.log10(p[mask]), 1)
    return float(slope)


# ============================================================================
# WAV I/O
# ============================================================================

def read_wav(path: Path) -> Waveform:
    """Mono waveform in [-1, 1] from PCM or float WAV; channels are averaged."""
    rate, data = wavfile.read(str(path))
    if data.dtype == np.int16:
        x = data / 32768.0
    elif data.dtype == np.int32:
        x = data / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(float) - 128.0) / 128.0
    else:
        x = data.astype(float)
    if x.ndim == 2:
        x = x.mean(axis=1)
    return Waveform(sample_rate=rate, samples=x)


def write_wav(path: Path, wave: Waveform, pcm16: bool = False) -> None:
    x = np.asarray(wave.samples)
    if pcm16:
        data = np.round(np.clip(x, -1.0, 1.0) * 32767.0).astype(np.int16)
    else:
        data = x.astype(np.float32)
    wavfile.write(str(path), int(wave.sample_rate), data)
