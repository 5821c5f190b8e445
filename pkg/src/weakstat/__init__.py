"""Weak-measurement statistics of post-selected quantum systems, computed
exactly and by finite-shot simulation."""

from . import operators
from .errors import WeakstatError
from .kernels import BACKEND
from .sampler import (
    CountTable,
    EstimateReport,
    SampleConfig,
    estimate_conditional_state,
    estimate_density,
    estimate_expectations,
    sample_sequential,
    sample_weak,
    sequential_probabilities,
)
from .scenarios import (
    Scenario,
    ScenarioReport,
    bell_chsh_scenario,
    bell_joint_table,
    chsh_value,
    double_slit_scenario,
    entangled_scenario,
    evaluate,
)
from .tomography import (
    ConditionalState,
    TomographyBasis,
    WeakPOVM,
    build_weak_povm,
    conditional_probability,
    conditional_state,
    decompose,
    gell_mann_basis,
    joint_outcome_probability,
    joint_probability,
    outcome_probabilities,
    reconstruct_density,
    reconstruct_expectations,
)

__version__ = "0.1.0"
