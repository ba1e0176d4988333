"""Success probabilities, fidelities and bounds for probabilistic immaculate amplifiers."""

from .fock import FockVector, CoherentParams, coherent, coherent_fock, default_cutoff
from .gaussian import GaussianAmpSpec
from .kraus import AmplifierSpec
from .usd import SymmetricEnsemble

__version__ = "0.1.0"
