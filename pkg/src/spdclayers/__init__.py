"""Simulation and design of photon-pair generation in nonlinear layered structures.

The package propagates vectorial TE/TM plane waves through a 1D layer stack
with 2x2 transfer matrices, assembles the two-photon spectral amplitude of
collinear and non-collinear down-conversion over emission angles and
frequencies, reduces it to measurable densities (transverse profiles,
correlated areas, relative efficiencies), and runs a transmission-peak-pinned
design sweep over the optical-length ratio of a two-material stack.
"""

from .constants import CONSTANTS, PhysicalConstants
from .errors import (
    ComputationError,
    InvalidArgument,
    NotFound,
    OutOfRange,
    PeakNotFound,
    SingularMatrix,
    WindowMiss,
)
from .materials import (
    DispersionModel,
    Material,
    MaterialDB,
    default_material_db,
    effective_tm_index,
    refractive_index,
)
from .stack import Layer, Stack, build_ab_stack, scale_stack
from .linear_optics import (
    LayerAmplitudes,
    ModeCoordinates,
    TransmissionSpectrum,
    find_bands_and_peaks,
    layer_amplitudes,
    snell_internal_angle,
    transmission_spectrum,
)
from .pump import PumpConfig, TransverseEnvelope, cw_spectral_weight, transverse_envelope
from .geometry import detector_rotation_angle, idler_direction, polarization_vector
from .twophoton import TwoPhotonAmplitude, assemble_phi
from . import observables
from .designer import DesignPoint, DesignSweep, efficiency_sweep, pin_lengths_to_pump, select_best

__version__ = "0.1.0"
