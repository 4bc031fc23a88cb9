"""PCM audio core: clips, WAV I/O, synthetic keyword utterances, channel model.

Everything is mono 16-bit PCM; the canonical internal rate is 16 kHz.
All randomness flows through numpy SeedSequence so a given seed produces
bit-identical samples on every run and platform.
"""
from __future__ import annotations

import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AudioError,
    EmptyPayloadError,
    MalformedWavError,
    UnsupportedWavError,
)

SAMPLE_RATE = 16000
FULL_SCALE = 32768.0
SILENCE_FLOOR_DB = -120.0

KEYWORDS = ("yes", "stop", "go")
NOISE_KINDS = ("none", "chatter", "fabric")

# Salts keep the signature table, per-utterance jitter and channel noise
# in disjoint seed spaces.
_SIGNATURE_SALT = 0x5EED_0001
_UTTERANCE_SALT = 0x5EED_0002
_CHANNEL_SALT = 0x5EED_0003

# Per-keyword chirp trajectories (start_hz, end_hz). The three keywords
# occupy distinct bands so their waveforms stay decorrelated (< 0.3
# normalized cross-correlation) for every speaker drawn from the table.
_KEYWORD_CHIRPS = {
    "yes": ((500.0, 900.0), (1400.0, 1100.0), (2300.0, 2700.0)),
    "stop": ((350.0, 650.0), (1800.0, 1400.0), (3000.0, 3300.0)),
    "go": ((700.0, 400.0), (1100.0, 1700.0), (2600.0, 2000.0)),
}

_GOLDEN = 0.6180339887498949
_PEAK_AMPLITUDE = 0.7


@dataclass
class AudioClip:
    """Mono PCM clip: int16 samples interpreted as reals in [-1, 1)."""

    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1:
            raise AudioError("clips are mono: expected a 1-D sample array")
        if arr.dtype != np.int16:
            if not np.issubdtype(arr.dtype, np.integer):
                raise AudioError(
                    "samples must be int16 (use AudioClip.from_float for reals)"
                )
            if arr.size and (arr.max(initial=0) > 32767 or arr.min(initial=0) < -32768):
                raise AudioError("integer samples out of int16 range")
            arr = arr.astype(np.int16)
        self.samples = arr
        if self.sample_rate_hz <= 0:
            raise AudioError("sample_rate_hz must be positive")

    @classmethod
    def from_float(cls, x, sample_rate_hz: int = SAMPLE_RATE) -> "AudioClip":
        """Quantize real-valued samples (clipped to [-1, 1)) to int16."""
        x = np.asarray(x, dtype=np.float64)
        q = np.clip(np.rint(x * FULL_SCALE), -32768, 32767).astype(np.int16)
        return cls(q, sample_rate_hz)

    def as_float(self) -> np.ndarray:
        return self.samples.astype(np.float64) / FULL_SCALE

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self) -> int:
        return len(self.samples)


@dataclass
class UtteranceSpec:
    """Deterministic recipe for one synthetic keyword utterance."""

    keyword_id: str
    speaker_id: int
    duration_s: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if self.keyword_id not in KEYWORDS:
            raise AudioError(f"unknown keyword {self.keyword_id!r}; expected one of {KEYWORDS}")
        if self.duration_s <= 0:
            raise AudioError("utterance duration must be positive")


@dataclass
class ChannelModel:
    """Free-field distance attenuation plus seeded ambient noise mixing.

    Levels are relative: only the speech/noise difference (the SNR)
    matters, and it is enforced against the distance-attenuated speech.
    """

    distance_m: float
    noise_kind: str = "none"
    speech_level_db: float = 65.0
    noise_level_db: float = 55.0
    reference_distance_m: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise AudioError("distance_m must be positive")
        if self.reference_distance_m <= 0:
            raise AudioError("reference_distance_m must be positive")
        if self.noise_kind not in NOISE_KINDS:
            raise AudioError(f"unknown noise kind {self.noise_kind!r}; expected one of {NOISE_KINDS}")

    @property
    def snr_db(self) -> float:
        return self.speech_level_db - self.noise_level_db

    @property
    def gain_db(self) -> float:
        return 20.0 * np.log10(self.reference_distance_m / self.distance_m)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if len(x) else 0.0


def rms_db(clip: AudioClip) -> float:
    """RMS level in dB relative to full scale, floored at -120 dB."""
    if len(clip) == 0:
        raise AudioError("rms_db of an empty clip")
    r = _rms(clip.as_float())
    if r <= 10.0 ** (SILENCE_FLOOR_DB / 20.0):
        return SILENCE_FLOOR_DB
    return 20.0 * float(np.log10(r))


# ---------------------------------------------------------------------------
# WAV container


def load_wav(path) -> AudioClip:
    """Read a RIFF/WAVE file: PCM 16-bit, mono or stereo, any rate.

    Stereo is downmixed by averaging; rates other than 16 kHz are
    resampled by linear interpolation (lossy, adequate for speech-band
    work). Distinct errors for malformed headers, unsupported codecs and
    empty payloads.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedWavError(f"malformed WAV: {path} is not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedWavError(f"malformed WAV: truncated {cid!r} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise MalformedWavError("malformed WAV: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data" and payload is None:
            payload = body
        pos += 8 + size + (size & 1)

    if fmt is None or payload is None:
        raise MalformedWavError("malformed WAV: missing fmt or data chunk")

    tag, channels, rate, _byterate, _align, bits = fmt
    if tag != 1:
        raise UnsupportedWavError(f"unsupported WAV codec id {tag} (PCM only)")
    if bits != 16:
        raise UnsupportedWavError(f"unsupported WAV bit depth {bits} (16-bit only)")
    if channels not in (1, 2):
        raise UnsupportedWavError(f"unsupported channel count {channels}")
    if len(payload) < 2 * channels:
        raise EmptyPayloadError("WAV data chunk holds zero samples")

    usable = len(payload) - len(payload) % (2 * channels)
    samples = np.frombuffer(payload[:usable], dtype="<i2").astype(np.float64)
    if channels == 2:
        samples = (samples[0::2] + samples[1::2]) / 2.0
    if rate != SAMPLE_RATE:
        samples = _resample_linear(samples, rate, SAMPLE_RATE)
    q = np.clip(np.rint(samples), -32768, 32767).astype(np.int16)
    return AudioClip(q, SAMPLE_RATE)


def _resample_linear(x: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    # Output grid covers [0, (n-1)/src]; length floor((n-1)*dst/src) + 1.
    n = len(x)
    if n == 0:
        return x
    out_n = (n - 1) * dst_rate // src_rate + 1
    positions = np.arange(out_n) * (src_rate / dst_rate)
    return np.interp(positions, np.arange(n), x)


def save_wav(clip: AudioClip, path) -> None:
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(clip.sample_rate_hz)
        w.writeframes(clip.samples.astype("<i2").tobytes())


# ---------------------------------------------------------------------------
# Synthetic utterances


def _speaker_scale(speaker_id: int) -> float:
    # Golden-ratio spacing keeps small speaker sets well separated in
    # frequency instead of gambling on uniform draws colliding.
    return float(2.0 ** (((speaker_id * _GOLDEN) % 1.0) * 0.6 - 0.3))


def _signature_table(keyword_id: str, speaker_id: int):
    """Chirp (start, end) frequencies, phases and relative amplitudes for
    one (keyword, speaker) pair, drawn from a seeded table."""
    kw_idx = KEYWORDS.index(keyword_id)
    rng = np.random.default_rng(
        np.random.SeedSequence([_SIGNATURE_SALT, kw_idx, speaker_id & 0xFFFFFFFF])
    )
    scale = _speaker_scale(speaker_id)
    chirps = []
    for f0, f1 in _KEYWORD_CHIRPS[keyword_id]:
        wobble = rng.uniform(0.97, 1.03, size=2)
        chirps.append((f0 * scale * wobble[0], f1 * scale * wobble[1]))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
    amps = rng.uniform(0.7, 1.0, size=3)
    return chirps, phases, amps


def synthesize_utterance(spec: UtteranceSpec) -> AudioClip:
    """Deterministic keyword signature: 3 chirps under a raised-cosine
    envelope, with per-utterance onset shift and envelope wobble so that
    repeated seeds give distinct but phase-coherent realizations."""
    n = round(spec.duration_s * SAMPLE_RATE)
    if n <= 0:
        raise AudioError("utterance duration must be positive")

    chirps, phases, amps = _signature_table(spec.keyword_id, spec.speaker_id)
    rng = np.random.default_rng(
        np.random.SeedSequence(
            [
                _UTTERANCE_SALT,
                KEYWORDS.index(spec.keyword_id),
                spec.speaker_id & 0xFFFFFFFF,
                spec.seed & 0xFFFFFFFFFFFFFFFF,
            ]
        )
    )
    shift = int(rng.uniform(0.0, 0.02) * SAMPLE_RATE)
    shift = min(shift, max(n - 2, 0))
    active = n - shift
    t = np.arange(active) / SAMPLE_RATE
    dur = active / SAMPLE_RATE

    x = np.zeros(active)
    for (f0, f1), phase, amp in zip(chirps, phases, amps):
        # Linear chirp: instantaneous frequency runs f0 -> f1 over the span.
        arg = 2.0 * np.pi * (f0 * t + (f1 - f0) / (2.0 * dur) * t * t) + phase
        x += amp * np.cos(arg)
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= _PEAK_AMPLITUDE / peak

    envelope = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(active) / max(active - 1, 1))
    wob_f = rng.uniform(2.0, 6.0, size=2)
    wob_p = rng.uniform(0.0, 2.0 * np.pi, size=2)
    wobble = 1.0 + 0.06 * (
        np.sin(2.0 * np.pi * wob_f[0] * t + wob_p[0])
        + np.sin(2.0 * np.pi * wob_f[1] * t + wob_p[1])
    )
    x *= envelope * wobble

    out = np.zeros(n)
    out[shift:] = x
    return AudioClip.from_float(out, SAMPLE_RATE)


# ---------------------------------------------------------------------------
# Channel model


def _bandpass_fft(x: np.ndarray, lo_hz: float, hi_hz: float, rate: int) -> np.ndarray:
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    spectrum[(freqs < lo_hz) | (freqs > hi_hz)] = 0.0
    return np.fft.irfft(spectrum, n=len(x))


def _noise_chatter(n: int, rate: int, rng: np.random.Generator) -> np.ndarray:
    """Speech-band (300-3400 Hz) noise with a slow amplitude modulation."""
    white = rng.standard_normal(n)
    band = _bandpass_fft(white, 300.0, 3400.0, rate)
    t = np.arange(n) / rate
    mod_f = rng.uniform(2.0, 6.0)
    mod_p = rng.uniform(0.0, 2.0 * np.pi)
    return band * (1.0 + 0.5 * np.sin(2.0 * np.pi * mod_f * t + mod_p))


def _noise_fabric(n: int, rate: int, rng: np.random.Generator) -> np.ndarray:
    """Low-passed broadband bursts (rustle-like)."""
    white = rng.standard_normal(n)
    envelope = np.zeros(n)
    pos = int(rng.uniform(0.0, 0.02) * rate)
    while pos < n:
        burst = int(rng.uniform(0.03, 0.15) * rate)
        end = min(pos + burst, n)
        span = end - pos
        if span > 1:
            envelope[pos:end] = 0.5 - 0.5 * np.cos(
                2.0 * np.pi * np.arange(span) / (span - 1)
            )
        elif span == 1:
            envelope[pos] = 1.0
        pos = end + int(rng.uniform(0.05, 0.25) * rate)
    return _bandpass_fft(white * envelope, 0.0, 1500.0, rate)


_NOISE_GENERATORS = {"chatter": _noise_chatter, "fabric": _noise_fabric}


def apply_channel(clip: AudioClip, ch: ChannelModel) -> AudioClip:
    """Attenuate speech by the inverse-distance law and mix seeded noise.

    Noise is scaled against the attenuated speech RMS so the post-mix SNR
    equals ch.snr_db regardless of distance. With noise_kind "none" and
    distance at the reference, the clip passes through bit-identically.
    """
    gain = ch.reference_distance_m / ch.distance_m
    if ch.noise_kind == "none" and gain == 1.0:
        return AudioClip(clip.samples.copy(), clip.sample_rate_hz)

    speech = clip.as_float() * gain
    if ch.noise_kind != "none":
        rng = np.random.default_rng(
            np.random.SeedSequence([_CHANNEL_SALT, ch.seed & 0xFFFFFFFFFFFFFFFF])
        )
        noise = _NOISE_GENERATORS[ch.noise_kind](len(speech), clip.sample_rate_hz, rng)
        speech_rms = _rms(speech)
        noise_rms = _rms(noise)
        if speech_rms > 0 and noise_rms > 0:
            target = speech_rms * 10.0 ** (-ch.snr_db / 20.0)
            speech = speech + noise * (target / noise_rms)
    return AudioClip.from_float(speech, clip.sample_rate_hz)


def synthesize_noise(
    kind: str, duration_s: float, seed: int, level_db: float = -30.0,
    sample_rate_hz: int = SAMPLE_RATE,
) -> AudioClip:
    """Standalone seeded noise clip at a target RMS level (dBFS)."""
    if kind not in _NOISE_GENERATORS:
        raise AudioError(f"unknown noise kind {kind!r}")
    n = round(duration_s * sample_rate_hz)
    if n <= 0:
        raise AudioError("noise duration must be positive")
    rng = np.random.default_rng(
        np.random.SeedSequence([_CHANNEL_SALT, 0xA0, seed & 0xFFFFFFFFFFFFFFFF])
    )
    noise = _NOISE_GENERATORS[kind](n, sample_rate_hz, rng)
    r = _rms(noise)
    if r > 0:
        noise *= 10.0 ** (level_db / 20.0) / r
    return AudioClip.from_float(noise, sample_rate_hz)


# ---------------------------------------------------------------------------
# Small construction helpers shared by tests, the tracker and the bench


def silence(duration_s: float, sample_rate_hz: int = SAMPLE_RATE) -> AudioClip:
    n = round(duration_s * sample_rate_hz)
    return AudioClip(np.zeros(max(n, 0), dtype=np.int16), sample_rate_hz)


def tone(
    freq_hz: float, duration_s: float, amplitude: float = 0.5,
    sample_rate_hz: int = SAMPLE_RATE, phase: float = 0.0,
) -> AudioClip:
    n = round(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz
    return AudioClip.from_float(amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase), sample_rate_hz)


def tone_mixture(
    seed: int, duration_s: float, n_tones: int = 4,
    lo_hz: float = 100.0, hi_hz: float = 3400.0, total_amplitude: float = 0.8,
    sample_rate_hz: int = SAMPLE_RATE,
) -> AudioClip:
    """Seeded sum of band-limited tones; the codec's speech-like test signal."""
    rng = np.random.default_rng(np.random.SeedSequence([0x70DE, seed & 0xFFFFFFFFFFFFFFFF]))
    n = round(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz
    freqs = rng.uniform(lo_hz, hi_hz, size=n_tones)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_tones)
    weights = rng.uniform(0.5, 1.0, size=n_tones)
    weights *= total_amplitude / weights.sum()
    x = np.zeros(n)
    for f, p, w in zip(freqs, phases, weights):
        x += w * np.sin(2.0 * np.pi * f * t + p)
    return AudioClip.from_float(x, sample_rate_hz)


def concat(clips) -> AudioClip:
    clips = list(clips)
    if not clips:
        raise AudioError("cannot concatenate zero clips")
    rate = clips[0].sample_rate_hz
    if any(c.sample_rate_hz != rate for c in clips):
        raise AudioError("sample rate mismatch in concat")
    return AudioClip(np.concatenate([c.samples for c in clips]), rate)


def scale(clip: AudioClip, gain: float) -> AudioClip:
    return AudioClip.from_float(clip.as_float() * gain, clip.sample_rate_hz)
