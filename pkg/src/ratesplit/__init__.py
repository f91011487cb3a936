"""Rate-splitting precoder optimization for the multi-user MISO downlink
under partial CSIT: sample-average WMMSE alternating optimization, the
conservative closed-form variant, baselines, and a Monte-Carlo evaluation
harness.
"""

from .backend import KERNEL_BACKEND
from .baselines import InitScheme, init_precoder, nors_zf_wf, rs_zf_svd_baseline, water_filling
from .channel import (
    ChannelEstimate,
    ConditionalSample,
    ScenarioPool,
    generate_scenario,
    sample_conditional,
)
from .config import InvalidConfigError, SystemConfig, snr_db_to_power
from .optimizer import (
    AoTrace,
    AsrResult,
    ao_solve,
    conservative_bundle,
    conservative_solve,
    weighted_asr_solve,
)
from .qcqp import (
    QcqpProblem,
    QcqpSolution,
    check_kkt,
    dump_problem,
    load_problem,
    problem_from_safs,
    solve_precoder_update,
)
from .ratewmmse import (
    EqualizerWeightPair,
    LinkPowers,
    Precoder,
    PrecoderMode,
    link_powers,
    mmse_equalizers,
    mmse_pair,
    rate_wmmse_identity_check,
    sinr_and_rate,
)
from .saa import (
    SafBundle,
    SampledEqualizers,
    accumulate_safs,
    compute_safs,
    sample_average_rates,
    update_equalizers_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AoTrace",
    "AsrResult",
    "ChannelEstimate",
    "ConditionalSample",
    "EqualizerWeightPair",
    "InitScheme",
    "InvalidConfigError",
    "KERNEL_BACKEND",
    "LinkPowers",
    "Precoder",
    "PrecoderMode",
    "QcqpProblem",
    "QcqpSolution",
    "SafBundle",
    "SampledEqualizers",
    "ScenarioPool",
    "SystemConfig",
    "accumulate_safs",
    "ao_solve",
    "check_kkt",
    "compute_safs",
    "conservative_bundle",
    "conservative_solve",
    "dump_problem",
    "generate_scenario",
    "init_precoder",
    "link_powers",
    "load_problem",
    "mmse_equalizers",
    "mmse_pair",
    "nors_zf_wf",
    "problem_from_safs",
    "rate_wmmse_identity_check",
    "rs_zf_svd_baseline",
    "sample_average_rates",
    "sample_conditional",
    "sinr_and_rate",
    "snr_db_to_power",
    "solve_precoder_update",
    "update_equalizers_weights",
    "water_filling",
    "weighted_asr_solve",
]
