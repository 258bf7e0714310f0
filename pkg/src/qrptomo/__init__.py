"""Quantum-state tomography of a cavity mode with a learnt measurement map.

Submodules: ``fock`` (operators and states), ``dynamics`` (qubit-cavity
simulation), ``design`` (idealised map and displacement optimization),
``learn`` (training data and ridge regression), ``reconstruct`` (state
estimation) and ``cli``.
"""

from .exceptions import (ConfigError, ConvergenceError, PhysicalityError, QrpError,
                         RankDeficiencyError, TraceDriftError, TruncationWarning)

__version__ = "0.1.0"

__all__ = ["ConfigError", "ConvergenceError", "PhysicalityError", "QrpError",
           "RankDeficiencyError", "TraceDriftError", "TruncationWarning", "__version__"]
