"""Exception hierarchy. Everything raised on purpose derives from VocoError."""


class VocoError(Exception):
    """Base class for all domain errors."""


class AudioError(VocoError):
    """Invalid audio input (empty clip, bad sample rate, bad parameters)."""


class MalformedWavError(AudioError):
    """File is not a parseable RIFF/WAVE container."""


class UnsupportedWavError(AudioError):
    """WAV parses but uses a codec/layout we do not read (non-PCM, not 16-bit)."""


class EmptyPayloadError(AudioError):
    """WAV data chunk is present but holds zero samples."""


class FeatureError(VocoError):
    """Feature extraction or DTW misuse (short clip, dimension mismatch)."""


class TemplateError(VocoError):
    """Keyword template enrollment/storage problems."""


class CodecError(VocoError):
    """Segment encode/decode problems."""


class BadMagicError(CodecError):
    """Segment header magic does not match."""


class TruncatedPayloadError(CodecError):
    """Segment payload shorter than the header promises."""


class TrackerError(VocoError):
    """Invalid tracker configuration or ledger state."""


class BackendError(VocoError):
    """An ASR/LLM backend failed; carries the backend diagnostics."""


class PromptError(VocoError):
    """Prompt template rendering failed (unresolved placeholder)."""


class WerError(VocoError):
    """WER preconditions violated (empty normalized reference)."""


class ConfigError(VocoError):
    """Bad configuration file or experiment spec."""
