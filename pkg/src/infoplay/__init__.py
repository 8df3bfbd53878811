"""Information-theoretic measurement of iterative decoders and self-play
agents: Shannon/LLR information estimators, capacity bounds for placement
games, a reference turbo decoder with EXIT-chart analysis, and an
instrumented tabular self-play harness evaluated with the same tools.
"""

from .capacity import (
    CapacityBound,
    Dominance,
    capacity_bounds,
    dominance_check,
    enumerate_reachable_states,
    log2_factorial,
)
from .entropy import (
    DiscreteDistribution,
    JointCounts,
    LlrBlock,
    MutualInfo,
    binary_entropy,
    j_function,
    j_inverse,
    mi_from_llrs,
    mutual_information_plugin,
    sample_consistent_gaussian_apriori,
    shannon_entropy,
)
from .exit_chart import (
    ExitCurve,
    Trajectory,
    TunnelReport,
    decoding_trajectory,
    measure_exit_curve,
    render_exit_chart,
    tunnel_analysis,
)
from .games import GameSpec, GameState, apply_move, initial_state, legal_moves, tic_tac_toe
from .selfplay import (
    AgentModel,
    LearnConfig,
    agent_exit_curve,
    elo_update,
    elo_win_prob,
    internal_rollout,
    learn,
    load_agent,
    measure_cross_mi,
    save_agent,
    self_play_episode,
)
from .turbo import (
    ChannelModel,
    Interleaver,
    RscCode,
    TurboIterationTrace,
    bcjr_decode,
    random_interleaver,
    rsc_encode,
    s_random_interleaver,
    simulate_turbo,
    transmit,
    turbo_decode,
    turbo_encode,
)

__version__ = "0.1.0"
