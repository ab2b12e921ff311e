"""Group-averaged quantum channels computed through their Choi operators."""

__version__ = "0.1.0"

from .cartan import (
    AbelianMeasure,
    BetaWeights,
    CartanGroupSpec,
    beta_weights,
    cartan_channel_twirl,
    kak_channel_twirl,
    kak_state_twirl,
)
from .channels import (
    ChoiOperator,
    KrausChannel,
    apply_channel,
    check_cp_tp,
    choi_from_kraus,
    identity_channel,
    kraus_from_choi,
    max_entangled,
    random_channel,
    unitary_channel,
)
from .commutant import (
    CommutantBasis,
    numerical_commutant,
    permutation_commutant_basis,
    project_onto_commutant,
    twirl_channel_exact,
    twirl_state,
)
from .designs import WeightedDesign, builtin_design, design_channel_twirl, verified, verify_design
from .dual import dual_channel_twirl, embed_basis, heisenberg_weyl, kraus_sum
from .errors import ContractError, DecompositionError, NotPSDError, ResourceGuardError, ShapeError, TwirlError
from .haar import haar_special_unitaries, haar_unitaries, haar_unitary
from .montecarlo import SampleEstimate, mc_cartan_twirl, mc_channel_twirl, mc_state_twirl
from .reps import Representation, choi_representation
from .schur import Sector, SectorDecomposition, decompose, verify_duality
from .tensor import TensorSpace, partial_trace, partial_transpose, permutation_matrix

__all__ = [name for name in dir() if not name.startswith("_")]
