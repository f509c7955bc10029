"""Stationary binary processes, block-law metrics, and a diagonalizing
adversary against Markov-order classifiers."""
from ._kernels import BACKEND
from .errors import (
    BudgetError,
    ClassifierError,
    ConstructionError,
    DecodeError,
    ErgolabError,
    InconsistentMarginalsError,
    IrreducibilityError,
    RangeError,
    ShapeError,
)
from .process import (
    FiniteDistribution,
    MarkovChainSpec,
    MarkovHandle,
    MixtureHandle,
    ProcessHandle,
    marginalize,
    sample_path,
    tv_block_distance,
)
from .generators import (
    RenewalSpec,
    WalkChainLabeling,
    example2_indicator,
    iid_bernoulli,
    markov_from_table,
    period2_chain,
    renewal_process,
    state_indicator_process,
    walk_chain_process,
)
from .rotation import RotationParams, build_rotation, rotation_process
from .markov_closure import ClosureResult, close_to_markov
from .splice import build_splice, decode_z, find_sync_word, find_typical_word, splice
from .metrics import (
    block_empirics,
    entropy_rate_plugin,
    ergodicity_certificate,
    length_correction_bound,
    pair_block_distance,
    typicality_check,
)
from .classifiers import Verdict, builtin_classifier, external_classifier, freq_markov_tester
from .adversary import Schedules, replay, run_diagonalization

__version__ = "0.1.0"
