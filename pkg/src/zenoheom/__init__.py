"""Quantum Zeno and anti-Zeno decay rates of spin-boson models from hierarchical equations of motion."""

__version__ = "0.1.0"

from .bath import BathDecomposition, Lorentzian, OhmicDrude  # noqa: E402
from .errors import ZenoHeomError  # noqa: E402
from .kernel import BACKEND  # noqa: E402
from .models import ModelSpec, biased_qubit, biased_qutrit, su2_coherent_state  # noqa: E402
from .zeno import Bath, SolverSettings, ZenoScan, scan  # noqa: E402

__all__ = [
    "BACKEND",
    "Bath",
    "BathDecomposition",
    "Lorentzian",
    "ModelSpec",
    "OhmicDrude",
    "SolverSettings",
    "ZenoHeomError",
    "ZenoScan",
    "__version__",
    "biased_qubit",
    "biased_qutrit",
    "scan",
    "su2_coherent_state",
]
