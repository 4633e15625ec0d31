"""p-adic and real-line quantum mechanics on finite truncation windows."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config_text
from .dynamics import (
    EvolutionPlan,
    energy,
    evolve_ctqw,
    evolve_padic,
    evolve_product,
    evolve_real_free,
    evolve_real_harmonic,
    fidelity,
    run_plan,
)
from .experiments import NumericalContractError, run_scenario
from .measurement import (
    CollapseOutcome,
    GrwParams,
    collapse_joint,
    grw_localize,
    grw_probability_density,
    grw_trajectory,
    interaction_probability,
    project_ball,
    pullback_real,
    restrict_wavelet,
)
from .operators import (
    CompositeHamiltonian,
    FreeHamiltonian,
    HarmonicHamiltonian,
    KernelOperator,
    VladimirovOperator,
    apply_kernel,
    apply_vladimirov_direct,
    apply_vladimirov_spectral,
    build_kernel,
    load_matrix,
)
from .padic_core import (
    Ball,
    BallRelation,
    PAdicApprox,
    additive_character,
    ball_relation,
    fractional_part,
    monna_image_of_ball,
    monna_map,
    norm,
    ord_p,
    valuation_and_norm,
)
from .states import (
    GridState,
    HarmonicState,
    JointSpectralState,
    ProductState,
    RealPacketState,
    SpectralState,
    WaveletIndex,
    Window,
    density_joint,
    density_padic,
    density_real,
    discretize,
    eval_wavelet,
    expand_indicator,
    read_state_csv,
    write_state_csv,
)

__version__ = "0.1.0"
