"""Fourth-moment channels of Clifford circuits doped with non-Clifford phase gates.

Subpackages by layer:

* :mod:`.s4`, :mod:`.pauli`, :mod:`.weingarten`: permutation operators, the
  Pauli projector ``Q`` and the unitary/Clifford Weingarten matrices.
* :mod:`.engine`: the exact k-doped channel (``Xi``/``Lambda`` recursion).
* :mod:`.closed_forms`: OTOC and purity predictions, gaps and thresholds.
* :mod:`.clifford`, :mod:`.circuits`, :mod:`.montecarlo`, :mod:`.oracle`:
  sampling, simulation, estimators and group-enumeration ground truth.
"""

__version__ = "0.1.0"

from .closed_forms import (ProbePrediction, ThresholdQuery, delta_otoc, delta_purity, otoc8_clifford,
                           otoc8_doped, otoc8_haar, otoc8_trace_doped, predict, purity_average,
                           purity_fluct, purity_fluct_asymmetric, purity_second_moment, threshold_k)
from .engine import build_xi_system, fold_channel_doped, fold_channel_haar, state_channel
from .weingarten import clifford_weingarten_pm, unitary_weingarten

__all__ = [
    "__version__", "ProbePrediction", "ThresholdQuery", "delta_otoc", "delta_purity",
    "otoc8_clifford", "otoc8_doped", "otoc8_haar", "otoc8_trace_doped", "predict",
    "purity_average", "purity_fluct", "purity_fluct_asymmetric", "purity_second_moment",
    "threshold_k", "build_xi_system", "fold_channel_doped", "fold_channel_haar", "state_channel",
    "clifford_weingarten_pm", "unitary_weingarten",
]
