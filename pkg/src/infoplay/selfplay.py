"""Two self-play agents with internal opponent models, instrumented with
information-theoretic measurements.

Each tabular agent keeps an afterstate value table (TD(0) learning), an
epsilon-greedy policy derived from it, and an opponent model built from
observed move frequencies; the opponent model is the agent's internal
channel.  The harness measures how much of each opponent's behavior the
other agent decodes (plug-in MI between predicted and actual moves,
normalized by log2 of the board size), tracks Elo, and stops learning
when the exchanged information stops increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import JointCounts, MutualInfo, _seed_sequence, mutual_information_plugin
from .errors import EstimationError, ValidationError
from .exit_chart import ExitCurve
from .games import (
    A_WINS,
    B_WINS,
    DRAW,
    GameSpec,
    GameState,
    ONGOING,
    PLAYER_A,
    PLAYER_B,
    apply_move,
    initial_state,
    legal_moves,
)

SNAPSHOT_HEADER = "# infoplay-agent-v1"

_TIE_TOL = 1e-12


@dataclass
class AgentModel:
    """One tabular self-play agent.

    ``value`` maps afterstate keys to expected outcome in [-1, 1] from
    this agent's perspective.  ``opponent_counts`` maps decision-state
    keys to observed opponent move counts; normalized over legal moves it
    is the opponent model used for internal rollouts, while the binned
    prediction used for MI measurement is the count argmax (an unvisited
    state yields an uninformed guess over the whole board, since a fresh
    internal channel carries no information, not even cell occupancy).
    """

    role: str
    step_size: float = 0.25
    epsilon: float = 0.1
    value: dict = field(default_factory=dict)
    opponent_counts: dict = field(default_factory=dict)
    seen_states: dict = field(default_factory=dict)  # insertion-ordered set

    def __post_init__(self):
        if self.role not in (PLAYER_A, PLAYER_B):
            raise ValidationError(f"role must be 'A' or 'B', got {self.role!r}")
        if not (0.0 <= self.step_size <= 1.0):
            raise ValidationError("step_size must lie in [0, 1] (0 = frozen values)")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValidationError("epsilon must lie in [0, 1]")

    # -- policy ------------------------------------------------------

    def afterstate_value(self, state: GameState) -> float:
        return self.value.get(state.key(), 0.0)

    def greedy_moves(self, state: GameState, game: GameSpec) -> list[int]:
        moves = legal_moves(state, game)
        vals = [self.afterstate_value(apply_move(state, m, game)) for m in moves]
        best = max(vals)
        return [m for m, v in zip(moves, vals) if v >= best - _TIE_TOL]

    def policy_distribution(self, state: GameState, game: GameSpec,
                            epsilon: float | None = None) -> np.ndarray:
        """Move distribution over all cells: epsilon-uniform exploration
        mixed with a greedy distribution that splits ties evenly."""
        eps = self.epsilon if epsilon is None else epsilon
        moves = legal_moves(state, game)
        ties = self.greedy_moves(state, game)
        dist = np.zeros(game.cells)
        dist[moves] = eps / len(moves)
        dist[ties] += (1.0 - eps) / len(ties)
        return dist

    def sample_move(self, state: GameState, game: GameSpec, rng,
                    epsilon: float | None = None) -> int:
        eps = self.epsilon if epsilon is None else epsilon
        if eps > 0.0 and rng.random() < eps:
            moves = legal_moves(state, game)
            return moves[rng.integers(len(moves))]
        ties = self.greedy_moves(state, game)
        return ties[rng.integers(len(ties))]

    # -- internal channel (opponent model) ----------------------------

    def observe_opponent_move(self, state: GameState, move: int, game: GameSpec):
        counts = self.opponent_counts.get(state.key())
        if counts is None:
            counts = np.zeros(game.cells, dtype=np.int64)
            self.opponent_counts[state.key()] = counts
        counts[move] += 1

    def opponent_model_distribution(self, state: GameState, game: GameSpec) -> np.ndarray:
        """Predicted opponent move distribution: observed frequencies,
        falling back to uniform over the legal moves at unseen states."""
        moves = legal_moves(state, game)
        dist = np.zeros(game.cells)
        counts = self.opponent_counts.get(state.key())
        if counts is None or counts[moves].sum() == 0:
            weights = np.ones(len(moves))
        else:
            weights = counts[moves].astype(float)
        dist[moves] = weights / weights.sum()
        return dist

    def predict_opponent_move(self, state: GameState, game: GameSpec, rng) -> int:
        counts = self.opponent_counts.get(state.key())
        if counts is None or counts.max() == 0:
            return int(rng.integers(game.cells))  # uninformed guess
        ties = np.flatnonzero(counts == counts.max())
        return int(ties[rng.integers(len(ties))])

    # -- learning ------------------------------------------------------

    def td_update(self, afterstate_key: str, target: float):
        old = self.value.get(afterstate_key, 0.0)
        self.value[afterstate_key] = old + self.step_size * (target - old)

    def note_seen(self, state: GameState):
        self.seen_states.setdefault(state.key())

    def reward(self, outcome: str) -> float:
        if outcome == DRAW:
            return 0.0
        won = (outcome == A_WINS) == (self.role == PLAYER_A)
        return 1.0 if won else -1.0


@dataclass(frozen=True)
class TranscriptStep:
    state: GameState
    move: int
    mover: str


@dataclass(frozen=True)
class Transcript:
    steps: tuple
    outcome: str
    final_state: GameState


def _play_episode(agent_a: AgentModel, agent_b: AgentModel, game: GameSpec, rng,
                  epsilon: float | None = None) -> Transcript:
    state = initial_state(game)
    steps = []
    while state.status == ONGOING:
        mover = state.to_move
        agent = agent_a if mover == PLAYER_A else agent_b
        move = agent.sample_move(state, game, rng, epsilon)
        steps.append(TranscriptStep(state=state, move=move, mover=mover))
        state = apply_move(state, move, game)
    return Transcript(steps=tuple(steps), outcome=state.status, final_state=state)


def self_play_episode(agent_a: AgentModel, agent_b: AgentModel, game: GameSpec,
                      seed, epsilon: float | None = None) -> Transcript:
    """One full game between two frozen agents; reproducible given the seed."""
    rng = np.random.default_rng(seed)
    return _play_episode(agent_a, agent_b, game, rng, epsilon)


def internal_rollout(agent: AgentModel, game: GameSpec, seed) -> Transcript:
    """A game the agent plays within itself: its own policy on its side,
    moves sampled from its opponent model on the other side."""
    rng = np.random.default_rng(seed)
    state = initial_state(game)
    steps = []
    while state.status == ONGOING:
        mover = state.to_move
        if mover == agent.role:
            move = agent.sample_move(state, game, rng)
        else:
            dist = agent.opponent_model_distribution(state, game)
            move = int(rng.choice(game.cells, p=dist))
        steps.append(TranscriptStep(state=state, move=move, mover=mover))
        state = apply_move(state, move, game)
    return Transcript(steps=tuple(steps), outcome=state.status, final_state=state)


def _training_episode(agent_a: AgentModel, agent_b: AgentModel, game: GameSpec, rng):
    """One self-play game with online TD(0) afterstate updates and
    opponent-model observation for both agents."""
    state = initial_state(game)
    last_after = {PLAYER_A: None, PLAYER_B: None}
    while state.status == ONGOING:
        mover = state.to_move
        agent = agent_a if mover == PLAYER_A else agent_b
        other = agent_b if mover == PLAYER_A else agent_a
        agent.note_seen(state)
        move = agent.sample_move(state, game, rng)
        other.observe_opponent_move(state, move, game)
        after = apply_move(state, move, game)
        if last_after[mover] is not None:
            agent.td_update(last_after[mover], agent.afterstate_value(after))
        last_after[mover] = after.key()
        state = after
    for agent in (agent_a, agent_b):
        if last_after[agent.role] is not None:
            agent.td_update(last_after[agent.role], agent.reward(state.status))
    return state.status


@dataclass(frozen=True)
class EvaluationResult:
    outcomes: tuple
    predicted_b: tuple  # A's predictions of B's moves
    actual_b: tuple
    predicted_a: tuple  # B's predictions of A's moves
    actual_a: tuple
    episodes: int


def _evaluate(agent_a: AgentModel, agent_b: AgentModel, game: GameSpec,
              episodes: int, rng, epsilon: float = 0.0) -> EvaluationResult:
    outcomes = []
    pred_b, act_b, pred_a, act_a = [], [], [], []
    for _ in range(episodes):
        transcript = _play_episode(agent_a, agent_b, game, rng, epsilon)
        outcomes.append(transcript.outcome)
        for step in transcript.steps:
            if step.mover == PLAYER_B:
                pred_b.append(agent_a.predict_opponent_move(step.state, game, rng))
                act_b.append(step.move)
            else:
                pred_a.append(agent_b.predict_opponent_move(step.state, game, rng))
                act_a.append(step.move)
    return EvaluationResult(
        outcomes=tuple(outcomes),
        predicted_b=tuple(pred_b),
        actual_b=tuple(act_b),
        predicted_a=tuple(pred_a),
        actual_a=tuple(act_a),
        episodes=episodes,
    )


@dataclass(frozen=True)
class CrossMi:
    i_ba: MutualInfo
    i_ab: MutualInfo
    bits_ba_per_game: float
    bits_ab_per_game: float
    decision_points: int


def _paired_mi(predicted, actual, cells: int) -> tuple[float, float]:
    counts = np.zeros((cells, cells), dtype=np.int64)
    np.add.at(counts, (np.asarray(predicted), np.asarray(actual)), 1)
    bits = mutual_information_plugin(JointCounts(counts)).value
    return bits, bits / math.log2(cells)


def cross_mi_from_evaluation(ev: EvaluationResult, game: GameSpec) -> CrossMi:
    points = len(ev.actual_b) + len(ev.actual_a)
    if min(len(ev.actual_b), len(ev.actual_a)) < 30:
        raise EstimationError(
            f"too few decision points pooled ({len(ev.actual_b)} for B, "
            f"{len(ev.actual_a)} for A); need at least 30 per direction"
        )
    bits_ba, norm_ba = _paired_mi(ev.predicted_b, ev.actual_b, game.cells)
    bits_ab, norm_ab = _paired_mi(ev.predicted_a, ev.actual_a, game.cells)
    return CrossMi(
        i_ba=MutualInfo(norm_ba, "normalized"),
        i_ab=MutualInfo(norm_ab, "normalized"),
        bits_ba_per_game=bits_ba * len(ev.actual_b) / ev.episodes,
        bits_ab_per_game=bits_ab * len(ev.actual_a) / ev.episodes,
        decision_points=points,
    )


def measure_cross_mi(agent_a: AgentModel, agent_b: AgentModel, game: GameSpec,
                     episodes: int, seed) -> CrossMi:
    """How much each agent decodes of the other, over fresh evaluation games.

    I_{B-A} is the plug-in MI between agent A's binned prediction (argmax
    of its opponent model) and agent B's actual move, pooled over every B
    decision point, normalized by log2(board cells); I_{A-B} symmetric.
    Agents are frozen; play is greedy with seeded tie-breaking.
    """
    if episodes < 100:
        raise ValidationError("episodes must be >= 100 for a stable estimate")
    rng = np.random.default_rng(seed)
    return cross_mi_from_evaluation(_evaluate(agent_a, agent_b, game, episodes, rng), game)


def elo_win_prob(e_a: float, e_b: float, c_elo: float = 1.0 / 400.0) -> float:
    """Logistic win probability 1 / (1 + 10^(c_elo (e_b - e_a)))."""
    if c_elo <= 0:
        raise ValidationError("c_elo must be > 0")
    return 1.0 / (1.0 + 10.0 ** (c_elo * (e_b - e_a)))


def elo_update(e_a: float, e_b: float, outcome: str, k_factor: float = 16.0,
               c_elo: float = 1.0 / 400.0) -> tuple[float, float]:
    """Standard rating update; zero-sum, draws score one half."""
    if k_factor <= 0:
        raise ValidationError("k_factor must be > 0")
    scores = {A_WINS: 1.0, DRAW: 0.5, B_WINS: 0.0}
    if outcome not in scores:
        raise ValidationError(f"unknown outcome {outcome!r}")
    delta = k_factor * (scores[outcome] - elo_win_prob(e_a, e_b, c_elo))
    return e_a + delta, e_b - delta


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    i_ba: MutualInfo
    i_ab: MutualInfo
    elo_a: float
    elo_b: float
    draw_rate: float
    a_win_rate: float
    b_win_rate: float
    bits_ba_per_game: float
    bits_ab_per_game: float

    def __post_init__(self):
        if abs(self.a_win_rate + self.b_win_rate + self.draw_rate - 1.0) > 1e-9:
            raise ValidationError("win/draw rates must sum to 1")


@dataclass(frozen=True)
class LearnConfig:
    """Committed defaults for the tic-tac-toe scale harness.

    Exploration and the TD step size both anneal linearly over
    ``anneal_generations``; the step size anneals to zero, which freezes
    the value tables (and with them the greedy play lines) so the
    exchanged-information series can actually plateau and trip the
    stopping rule.
    """

    generations: int = 70
    episodes_per_generation: int = 600
    eval_episodes: int = 200
    stop_window: int = 8
    stop_delta: float = 0.02
    step_size: float = 0.25
    step_size_end: float = 0.0
    epsilon_start: float = 0.35
    epsilon_end: float = 0.05
    anneal_generations: int | None = 45
    eval_epsilon: float = 0.0
    elo_initial: float = 1000.0
    elo_k: float = 16.0
    c_elo: float = 1.0 / 400.0

    def __post_init__(self):
        if self.generations < 1 or self.episodes_per_generation < 1:
            raise ValidationError("generation and episode counts must be >= 1")
        if self.eval_episodes < 100:
            raise ValidationError("eval_episodes must be >= 100")
        if self.stop_window < 1:
            raise ValidationError("stop_window must be >= 1")
        if not self.stop_delta > 0:
            raise ValidationError("stop_delta must be > 0 (may be inf)")
        for eps in (self.epsilon_start, self.epsilon_end, self.eval_epsilon):
            if not (0.0 <= eps <= 1.0):
                raise ValidationError("exploration rates must lie in [0, 1]")
        if not (0.0 < self.step_size <= 1.0) or not (0.0 <= self.step_size_end <= 1.0):
            raise ValidationError("step sizes must lie in (0, 1]")
        if self.elo_k <= 0 or self.c_elo <= 0:
            raise ValidationError("elo parameters must be positive")


def _stop_rule_fires(i_ba: list, i_ab: list, window: int, delta: float) -> bool:
    """The learning process stops once the exchanged information no longer
    increases: every consecutive change among the last ``window`` recorded
    generations stays below ``delta`` in magnitude, for both directions.
    (Magnitudes, so a transient dip-and-recovery cannot sneak through the
    gate and the stopped window is genuinely flat.)"""
    if len(i_ba) < window:
        return False
    recent_ba = i_ba[-window:]
    recent_ab = i_ab[-window:]
    changes = [abs(b - a) for a, b in zip(recent_ba, recent_ba[1:])]
    changes += [abs(b - a) for a, b in zip(recent_ab, recent_ab[1:])]
    return all(c < delta for c in changes)


def learn(game: GameSpec, config: LearnConfig, seed, initial_agents=None):
    """Run the instrumented self-play loop.

    Per generation: training episodes (epsilon-greedy TD(0) on both
    agents, opponent models updated by observed frequencies), then a
    frozen evaluation pass recording cross MI, Elo, and outcome rates.
    Stops early when the windowed stopping rule fires; the recorded MI
    need not reach 1.0, since learning may stop at a local optimum.
    Deterministic given (game, config, seed).

    ``initial_agents`` resumes from an (agent_a, agent_b) pair, e.g.
    loaded snapshots; otherwise both agents start fresh.  Returns
    (records, agent_a, agent_b).
    """
    if not isinstance(config, LearnConfig):
        raise ValidationError("config must be a LearnConfig")
    if initial_agents is not None:
        agent_a, agent_b = initial_agents
        if agent_a.role != PLAYER_A or agent_b.role != PLAYER_B:
            raise ValidationError("initial_agents must be an (A, B) pair")
    else:
        agent_a = AgentModel(role=PLAYER_A, step_size=config.step_size,
                             epsilon=config.epsilon_start)
        agent_b = AgentModel(role=PLAYER_B, step_size=config.step_size,
                             epsilon=config.epsilon_start)
    root = _seed_sequence(seed)
    anneal = config.anneal_generations or config.generations
    elo_a, elo_b = config.elo_initial, config.elo_initial
    records: list[GenerationRecord] = []
    series_ba: list[float] = []
    series_ab: list[float] = []
    for gen in range(1, config.generations + 1):
        frac = 0.0 if anneal <= 1 else min(1.0, (gen - 1) / (anneal - 1))
        epsilon = config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)
        step = config.step_size + frac * (config.step_size_end - config.step_size)
        agent_a.epsilon = agent_b.epsilon = epsilon
        agent_a.step_size = agent_b.step_size = step
        ss_train, ss_eval = root.spawn(2)
        train_rng = np.random.default_rng(ss_train)
        for _ in range(config.episodes_per_generation):
            _training_episode(agent_a, agent_b, game, train_rng)
        eval_rng = np.random.default_rng(ss_eval)
        ev = _evaluate(agent_a, agent_b, game, config.eval_episodes, eval_rng,
                       epsilon=config.eval_epsilon)
        cross = cross_mi_from_evaluation(ev, game)
        for outcome in ev.outcomes:
            elo_a, elo_b = elo_update(elo_a, elo_b, outcome, config.elo_k, config.c_elo)
        n = len(ev.outcomes)
        record = GenerationRecord(
            generation=gen,
            i_ba=cross.i_ba,
            i_ab=cross.i_ab,
            elo_a=elo_a,
            elo_b=elo_b,
            draw_rate=ev.outcomes.count(DRAW) / n,
            a_win_rate=ev.outcomes.count(A_WINS) / n,
            b_win_rate=ev.outcomes.count(B_WINS) / n,
            bits_ba_per_game=cross.bits_ba_per_game,
            bits_ab_per_game=cross.bits_ab_per_game,
        )
        records.append(record)
        series_ba.append(cross.i_ba.value)
        series_ab.append(cross.i_ab.value)
        if _stop_rule_fires(series_ba, series_ab, config.stop_window, config.stop_delta):
            break
    return records, agent_a, agent_b


def agent_exit_curve(agent: AgentModel, opponent: AgentModel, game: GameSpec,
                     ia_grid, episodes: int, seed, label: str = "") -> ExitCurve:
    """EXIT-like transfer curve of one agent's opponent prediction.

    A-priori information is injected by revealing the opponent's true next
    move to the predictor with probability q = I_A (a board-alphabet
    erasure channel of normalized capacity q); the output I_E is the
    normalized plug-in MI between the resulting predictions and the
    opponent's actual moves over fresh frozen evaluation games.
    """
    grid = np.asarray(ia_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValidationError("ia_grid must hold at least two points")
    if not ((0.0 <= grid).all() and (grid <= 1.0).all() and (np.diff(grid) > 0).all()):
        raise ValidationError("ia_grid must be sorted and within [0, 1]")
    if episodes < 100:
        raise ValidationError("episodes must be >= 100")
    if agent.role == opponent.role:
        raise ValidationError("agent and opponent must play different roles")
    agent_a = agent if agent.role == PLAYER_A else opponent
    agent_b = opponent if agent.role == PLAYER_A else agent
    root = _seed_sequence(seed)
    points = []
    for ss, ia in zip(root.spawn(len(grid)), grid):
        rng = np.random.default_rng(ss)
        predicted, actual = [], []
        for _ in range(episodes):
            transcript = _play_episode(agent_a, agent_b, game, rng, epsilon=0.0)
            for step in transcript.steps:
                if step.mover == agent.role:
                    continue
                if rng.random() < ia:
                    predicted.append(step.move)  # revealed
                else:
                    predicted.append(agent.predict_opponent_move(step.state, game, rng))
                actual.append(step.move)
        _, i_e = _paired_mi(predicted, actual, game.cells)
        points.append((float(ia), i_e))
    label = label or f"agent-{agent.role}"
    return ExitCurve(points=tuple(points), label=label, mc_samples=episodes)


def generation_csv(records, seed: int | None = None) -> str:
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append("generation,i_ba,i_ab,elo_a,elo_b,draw_rate,a_win_rate")
    for r in records:
        lines.append(
            f"{r.generation},{r.i_ba.value:.10g},{r.i_ab.value:.10g},"
            f"{r.elo_a:.10g},{r.elo_b:.10g},{r.draw_rate:.10g},{r.a_win_rate:.10g}"
        )
    return "\n".join(lines) + "\n"


# -- snapshot format -----------------------------------------------------


def agent_to_text(agent: AgentModel, game: GameSpec) -> str:
    """Versioned plain-text snapshot: hyperparameters, then one sorted line
    per table entry (V: afterstate values, O: opponent move counts,
    P: derived policy rows over the states this agent has acted in)."""
    lines = [
        SNAPSHOT_HEADER,
        f"role {agent.role}",
        f"game {game.game_id}",
        f"step_size {agent.step_size!r}",
        f"epsilon {agent.epsilon!r}",
    ]
    for key in sorted(agent.value):
        lines.append(f"V {key} {agent.value[key]!r}")
    for key in sorted(agent.opponent_counts):
        counts = agent.opponent_counts[key]
        packed = ",".join(f"{m}:{int(c)}" for m, c in enumerate(counts) if c)
        lines.append(f"O {key} {packed}")
    for key in sorted(agent.seen_states):
        state = _state_from_key(key)
        dist = agent.policy_distribution(state, game)
        packed = ",".join(f"{m}:{p!r}" for m, p in enumerate(dist) if p > 0)
        lines.append(f"P {key} {packed}")
    return "\n".join(lines) + "\n"


def _state_from_key(key: str) -> GameState:
    cells_part, to_move = key.split(":")
    cells = tuple(".AB".index(ch) for ch in cells_part)
    return GameState(cells=cells, to_move=to_move)


def agent_from_text(text: str, game: GameSpec) -> AgentModel:
    lines = text.strip().split("\n")
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise ValidationError("not an infoplay agent snapshot (bad header)")
    fields: dict[str, str] = {}
    value: dict[str, float] = {}
    counts: dict[str, np.ndarray] = {}
    seen: dict[str, None] = {}
    for line in lines[1:]:
        tag, _, rest = line.partition(" ")
        if tag == "V":
            key, _, num = rest.partition(" ")
            value[key] = float(num)
        elif tag == "O":
            key, _, packed = rest.partition(" ")
            arr = np.zeros(game.cells, dtype=np.int64)
            for item in packed.split(","):
                m, _, c = item.partition(":")
                arr[int(m)] = int(c)
            counts[key] = arr
        elif tag == "P":
            key, _, _ = rest.partition(" ")
            seen[key] = None  # policy rows are derived; reading keys restores them
        elif tag in ("role", "game", "step_size", "epsilon"):
            fields[tag] = rest
        else:
            raise ValidationError(f"unknown snapshot line tag {tag!r}")
    if fields.get("game") != game.game_id:
        raise ValidationError(
            f"snapshot is for game {fields.get('game')!r}, not {game.game_id!r}"
        )
    agent = AgentModel(
        role=fields["role"],
        step_size=float(fields["step_size"]),
        epsilon=float(fields["epsilon"]),
        value=value,
        opponent_counts=counts,
        seen_states=seen,
    )
    return agent


def save_agent(agent: AgentModel, game: GameSpec, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(agent_to_text(agent, game))


def load_agent(path, game: GameSpec) -> AgentModel:
    with open(path, "r", encoding="ascii") as fh:
        return agent_from_text(fh.read(), game)
