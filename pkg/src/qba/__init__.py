"""Blahut-Arimoto algorithms for quantum channel capacities."""

from .channels import (
    CqChannel,
    KrausChannel,
    amplitude_damping,
    classical_channel,
    complementary,
    cq_from_channel,
    depolarizing,
    identity_channel,
    random_cq,
)
from .engine import (
    CapacityResult,
    IterationTrace,
    Mode,
    ObjectiveSpec,
    SolverConfig,
    Termination,
    a_priori_iterations,
    solve,
)
from .errors import QBAError
from .objectives import (
    cb_min_conditional_entropy,
    coherent_info_objective,
    entropy_gain,
    holevo_objective,
    mutual_info_objective,
    thermo_objective,
)
from .states import GibbsSpec, relative_entropy, von_neumann_entropy

__version__ = "0.1.0"
