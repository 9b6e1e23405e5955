"""Identification of parametric underspread delay-Doppler systems from a single pulse-train probe."""
from .model import (DelayDopplerTriplet, DelayGroup, IdentifiabilityError, IdentifiabilityReport,
                    ProbeSpec, PulseSpec, SamplerSpec, SystemSpec, check_identifiability,
                    partition_bound_check)
from .waveform import DenseSignal, add_noise, apply_system, design_flat_pulse, synthesize_probe
from .sampler import (ChannelBank, CorrectionBank, acquire, correct, design_correction,
                      forward_oracle, make_kernel)
from .recovery import RecoveryError, RecoveryResult, identify
from .baseline import ambiguity, mf_surface, quantized_leakage

__version__ = "0.1.0"

__all__ = [
    "DelayDopplerTriplet", "DelayGroup", "IdentifiabilityError", "IdentifiabilityReport", "ProbeSpec",
    "PulseSpec", "SamplerSpec", "SystemSpec", "check_identifiability", "partition_bound_check",
    "DenseSignal", "add_noise", "apply_system", "design_flat_pulse", "synthesize_probe",
    "ChannelBank", "CorrectionBank", "acquire", "correct", "design_correction", "forward_oracle",
    "make_kernel", "RecoveryError", "RecoveryResult", "identify", "ambiguity", "mf_surface",
    "quantized_leakage",
]
