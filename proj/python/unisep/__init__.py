# Copyright 2026 The Unisep Authors.
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Universal sound separation: transforms, objectives, masking and models."""

from ._unisep import (
    DEFAULT_SAMPLE_RATE,
    Model,
    UnisepError,
    checksum_hex,
    init_model,
    mixture_consistency,
    read_wav,
    separate_oracle,
    si_sdr,
    si_sdr_improvement,
    stft_roundtrip,
    write_wav,
)

__all__ = [
    "DEFAULT_SAMPLE_RATE",
    "Model",
    "UnisepError",
    "checksum_hex",
    "init_model",
    "mixture_consistency",
    "read_wav",
    "separate_oracle",
    "si_sdr",
    "si_sdr_improvement",
    "stft_roundtrip",
    "write_wav",
]
