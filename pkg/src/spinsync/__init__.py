"""Two detuned spins in a common bath: Redfield and exact dephasing dynamics,
mutual synchronization and quantum correlations.
"""

__version__ = "0.1.0"

from .bath import BathParams, QuadratureSpec
from .model import ModelParams, bell_state, build_model, product_state
from .operators import DensityMatrix, PureState

__all__ = ["BathParams", "DensityMatrix", "ModelParams", "PureState", "QuadratureSpec", "__version__",
           "bell_state", "build_model", "product_state"]
