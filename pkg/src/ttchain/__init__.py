"""Tensor-train dynamics for chains with nearest-neighbor interactions.

The package factors quantum states and operators of chain-like systems
into tensor trains (matrix products), assembles Hamiltonians from local
building blocks, and runs stationary and time-dependent solvers on
them: alternating-sweep eigensolvers with deflation, explicit quantum
propagators (polynomial and split-operator), mean-field mixed
quantum-classical dynamics, and purely classical lattice dynamics.
Runs can be driven from YAML configurations through the ``ttchain``
command-line entry point; results travel in self-contained archive
files that support restart and comparison.
"""

__version__ = "0.1.0"

from .archive import (
    RunArchive,
    compare_runs,
    load_run,
    regress_conserved,
    save_run,
)
from .ceom import (
    CeomConfig,
    HarmonicFlow,
    ceom_coherent_init,
    ceom_exact,
    ceom_propagate,
)
from .chain import ChainSpec, SlimParts, ladder_ops, slim_to_tt
from .errors import (
    ConfigError,
    DenseCapExceeded,
    NumericsAbort,
    UnsupportedModelError,
)
from .models import CoupledModel, ExcitonModel, PhononModel
from .observables import (
    ObservableRecord,
    Recorder,
    expect_local,
    make_recorder,
    reduce_site,
    site_densities,
)
from .qcmd import QcmdConfig, qcmd_energy, qcmd_propagate
from .tdse import (
    PacketSpec,
    TdseConfig,
    bessel_reference,
    initial_coherent,
    initial_fundamental,
    initial_packet,
    propagate,
    propagate_dense,
)
from .tise import TiseConfig, TiseResult, solve_tise, solve_tise_dense
from .tt import (
    TruncationPolicy,
    TTOperator,
    TTState,
    dense_to_tt,
    random_tt,
    tt_add,
    tt_apply,
    tt_expect,
    tt_from_product,
    tt_inner,
    tt_norm,
    tt_op_mul,
    tt_orthonormalize,
    tt_scale,
    tt_to_dense,
    tt_truncate,
)

__all__ = [
    "ChainSpec",
    "SlimParts",
    "ladder_ops",
    "slim_to_tt",
    "ExcitonModel",
    "PhononModel",
    "CoupledModel",
    "TruncationPolicy",
    "TTState",
    "TTOperator",
    "tt_from_product",
    "dense_to_tt",
    "random_tt",
    "tt_add",
    "tt_scale",
    "tt_inner",
    "tt_norm",
    "tt_apply",
    "tt_op_mul",
    "tt_expect",
    "tt_orthonormalize",
    "tt_truncate",
    "tt_to_dense",
    "TiseConfig",
    "TiseResult",
    "solve_tise",
    "solve_tise_dense",
    "TdseConfig",
    "PacketSpec",
    "initial_fundamental",
    "initial_packet",
    "initial_coherent",
    "bessel_reference",
    "propagate",
    "propagate_dense",
    "QcmdConfig",
    "qcmd_energy",
    "qcmd_propagate",
    "CeomConfig",
    "HarmonicFlow",
    "ceom_coherent_init",
    "ceom_exact",
    "ceom_propagate",
    "ObservableRecord",
    "Recorder",
    "site_densities",
    "reduce_site",
    "expect_local",
    "make_recorder",
    "RunArchive",
    "save_run",
    "load_run",
    "compare_runs",
    "regress_conserved",
    "ConfigError",
    "DenseCapExceeded",
    "NumericsAbort",
    "UnsupportedModelError",
    "__version__",
]
