"""Differentiable surrogate of the normal and impaired auditory periphery.

Signal chain: middle ear -> dual-path compressive cochlear filterbank (OHC
loss lowers the active gain) -> IHC rectification and lowpass -> adapting
H/M/L auditory-nerve fibers -> fiber-count-weighted summed response.
"""

from hearloop.periphery._cfmap import (
    DEFAULT_CHANNELS,
    MAX_CF_HZ,
    MIN_CF_HZ,
    CFMap,
    cf_subset_indices,
    erb_hz,
    greenwood_cf,
    greenwood_frequency,
    greenwood_position,
)
from hearloop.periphery._config import FIBER_TYPES, P_REF_PA, FiberParams, FiberType, PeripheryConfig
from hearloop.periphery._model import Periphery, simulate
from hearloop.periphery._neurogram import Neurogram
from hearloop.periphery._profile import (
    NH_COUNTS,
    FiberCounts,
    HearingProfile,
    builtin_profiles,
    combine_profiles,
    flat_profile,
    load_profile,
    profile_from_pattern,
    sloping_audiogram,
    sloping_profile,
    synaptopathy_profile,
)
from hearloop.periphery._stages import (
    adaptation_coefficients,
    an_sum,
    anf_stage,
    cochlear_filter_coefficients,
    cochlear_stage,
    ihc_lowpass_coefficients,
    ihc_stage,
    middle_ear,
    middle_ear_coefficients,
    population_response,
)

__all__ = [
    # CF map
    "CFMap",
    "greenwood_cf",
    "greenwood_frequency",
    "greenwood_position",
    "cf_subset_indices",
    "erb_hz",
    "DEFAULT_CHANNELS",
    "MIN_CF_HZ",
    "MAX_CF_HZ",
    # Profiles
    "HearingProfile",
    "FiberCounts",
    "NH_COUNTS",
    "sloping_audiogram",
    "sloping_profile",
    "flat_profile",
    "synaptopathy_profile",
    "combine_profiles",
    "builtin_profiles",
    "profile_from_pattern",
    "load_profile",
    # Config
    "PeripheryConfig",
    "FiberParams",
    "FiberType",
    "FIBER_TYPES",
    "P_REF_PA",
    # Stages
    "middle_ear",
    "middle_ear_coefficients",
    "cochlear_stage",
    "cochlear_filter_coefficients",
    "ihc_stage",
    "ihc_lowpass_coefficients",
    "anf_stage",
    "adaptation_coefficients",
    "an_sum",
    "population_response",
    # Model
    "Neurogram",
    "Periphery",
    "simulate",
]
