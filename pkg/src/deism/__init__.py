"""Room transfer functions between directional transducers in shoebox rooms.

Implements a full mode-coupled image-source method (DEISM), its far-field
low-complexity variant (DEISM-LC), and the ISM-Omni, GISM, and FSRR reference
methods, together with a directivity fitting pipeline, comparison metrics,
file formats, and a CLI.
"""

from .baselines import (
    FsrrConfig,
    RtfSpectrum,
    fsrr_spectrum,
    gism_spectrum,
    greens_function,
    ism_omni_spectrum,
    rtf_fsrr,
    rtf_gism,
    rtf_ism_omni,
)
from .config import ARTIFACT_VERSION, SimulationConfig, load_config, parse_config_bytes
from .coupling import CouplingContext, single_path_coupling, reverberant_coupling
from .directivity import (
    Directivity,
    Medium,
    SampledSphereField,
    evaluate_exterior_field,
    extrapolate_to_radius,
    fibonacci_sphere_directions,
    fit_directivity,
    fit_wave_spectrum,
    gauss_legendre_sphere_grid,
    monopole_coefficients,
    point_receiver_coefficients,
    receiver_weights_from_reciprocity,
    rotate_azimuth,
    synthetic_directivity,
    truncation_order,
    wave_spectrum_to_coefficients,
)
from .engine import (
    DeismRequest,
    deism_spectrum,
    mirror_sh_identity_check,
    reciprocity_report,
    rtf_deism,
    rtf_deism_lc,
    single_path_lc,
)
from .errors import (
    ConditioningError,
    ConfigError,
    DeismError,
    FormatError,
    NumericError,
    ResourceError,
    SingularityError,
)
from .kernels import active_backend, available_backends, set_backend
from .metrics import ComparisonReport, compare, log_spectral_distance, phase_error, relative_l2, spl
from .room import (
    ImageRecord,
    ImageSet,
    RoomSpec,
    TransducerPose,
    generate_images,
    image_position,
    incident_angles,
    path_attenuation,
    path_vectors,
    reflection_coefficient,
    reversed_path_indices,
)
from .sph import (
    SphIndex,
    WignerTable,
    build_wigner_tables,
    sh_index,
    sh_matrix,
    spherical_bessel_j,
    spherical_bessel_y,
    spherical_hankel2,
    spherical_harmonic,
    wigner3j,
)

__version__ = ARTIFACT_VERSION
