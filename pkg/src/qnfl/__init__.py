"""Simulation and numerical verification of the quantum no-free-lunch bound for learning unitaries."""

from .errors import DomainError, ResourceError, ShapeError
from .haar import analytic_S4, estimate_S2, estimate_S4, invariance_check, sample_haar_state, sample_haar_unitary
from .hypothesis import Hypothesis, TrainingSet, block_residuals, optimal_hypothesis, realize_training_set
from .linalg import HermitianBasis, PureState, UnitaryOperator, expm_hermitian, gell_mann_basis
from .risk import quantum_nfl_bound, risk_closed_form, risk_mc_fidelity, risk_mc_tracenorm
from .rng import RngStream, derive_stream
from .variational import TrainConfig, VariationalParams, cost, gradient_fd, params_to_unitary, train

__version__ = "0.1.0"
