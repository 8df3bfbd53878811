"""Capacity bounds for placement games: log-factorial move-ordering bounds,
exhaustive reachable-state enumeration, and the information-dominance test.

The move-ordering bound log2(cells!) and the labeling bound
cells*log2(labels) are two distinct readings of "possible states of the
board"; both are reported side by side rather than conflated.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .entropy import MutualInfo
from .errors import ResourceCapError, ValidationError
from .games import GameSpec, GameState, K_IN_A_ROW, ONGOING, apply_move, initial_state, legal_moves

DEFAULT_STATE_CAP = 100_000_000

A_DOMINATES = "A_dominates"
B_DOMINATES = "B_dominates"
BALANCED = "balanced"


@dataclass(frozen=True)
class EnumerationResult:
    count: int
    log2_count: float


@dataclass(frozen=True)
class CapacityBound:
    """Bounds in bits on the information extractable from one game.

    ``exact_log2_states`` is present only when exhaustive enumeration
    succeeded under the state cap.
    """

    game_id: str
    upper_move_orderings: float
    upper_cell_labelings: float
    exact_log2_states: float | None = None
    exact_states: int | None = None


@dataclass(frozen=True)
class Dominance:
    verdict: str
    i_ba: MutualInfo
    i_ab: MutualInfo
    tolerance: float


def log2_factorial(n: int) -> float:
    """log2(n!) by direct summation of log2(k); exact to double precision."""
    if n < 0 or int(n) != n:
        raise ValidationError(f"n must be a non-negative integer, got {n!r}")
    if n < 2:
        return 0.0
    return float(np.log2(np.arange(2, int(n) + 1, dtype=float)).sum())


def _symmetry_maps(game: GameSpec) -> list[tuple]:
    """Index permutations of the board symmetry group (rectangle: 4,
    square: 8)."""
    idx = np.arange(game.cells).reshape(game.rows, game.cols)
    grids = [idx, idx[::-1, :], idx[:, ::-1], idx[::-1, ::-1]]
    if game.rows == game.cols:
        t = idx.T
        grids += [t, t[::-1, :], t[:, ::-1], t[::-1, ::-1]]
    return [tuple(g.ravel()) for g in grids]


def _state_key(state: GameState, maps: list[tuple] | None):
    if maps is None:
        return (state.cells, state.to_move)
    return (min(tuple(state.cells[i] for i in m) for m in maps), state.to_move)


def enumerate_reachable_states(
    game: GameSpec,
    method: str = "bfs",
    max_states: int = DEFAULT_STATE_CAP,
    symmetry_reduction: bool = False,
) -> EnumerationResult:
    """Count the distinct positions (terminal ones included) reachable from
    the empty board under legal play.

    ``method`` selects breadth-first or depth-first traversal; both must
    return the same count.  States are keyed on (cell contents, player to
    move); symmetry reduction additionally quotients by the board symmetry
    group and is off by default.
    """
    if method not in ("bfs", "dfs"):
        raise ValidationError(f"method must be 'bfs' or 'dfs', got {method!r}")
    maps = _symmetry_maps(game) if symmetry_reduction else None
    root = initial_state(game)
    visited = {_state_key(root, maps)}
    frontier = deque([root])
    pop = frontier.popleft if method == "bfs" else frontier.pop
    while frontier:
        state = pop()
        if state.status != ONGOING:
            continue
        for move in legal_moves(state, game):
            child = apply_move(state, move, game)
            key = _state_key(child, maps)
            if key not in visited:
                if len(visited) >= max_states:
                    raise ResourceCapError(
                        f"reachable-state enumeration exceeded the cap of {max_states} states"
                    )
                visited.add(key)
                frontier.append(child)
    count = len(visited)
    return EnumerationResult(count=count, log2_count=math.log2(count))


def _reachable_lower_bound(game: GameSpec, cap: int) -> int:
    """A cheap provable lower bound on the reachable-state count, used to
    skip enumeration that is certain to blow the cap.

    No game can terminate before ply 2k-1 (k_in_a_row) or before the board
    fills (board_full_scoring), so every balanced placement of p stones is
    reachable for p below that horizon.
    """
    if game.win_condition == K_IN_A_ROW:
        horizon = min(2 * game.k - 2, game.cells)
    else:
        horizon = game.cells
    total = 0
    for p in range(horizon + 1):
        total += math.comb(game.cells, p) * math.comb(p, (p + 1) // 2)
        if total > cap:
            return total
    return total


def capacity_bounds(game: GameSpec, max_states: int = DEFAULT_STATE_CAP) -> CapacityBound:
    """Move-ordering and labeling upper bounds, plus the exact reachable
    state count whenever enumeration fits under ``max_states``."""
    orderings = log2_factorial(game.cells)
    labelings = game.cells * math.log2(game.labels)
    exact_bits = None
    exact_states = None
    if _reachable_lower_bound(game, max_states) <= max_states:
        try:
            res = enumerate_reachable_states(game, max_states=max_states)
        except ResourceCapError:
            pass
        else:
            exact_bits = res.log2_count
            exact_states = res.count
    return CapacityBound(
        game_id=game.game_id,
        upper_move_orderings=orderings,
        upper_cell_labelings=labelings,
        exact_log2_states=exact_bits,
        exact_states=exact_states,
    )


def dominance_check(i_ba: MutualInfo, i_ab: MutualInfo, tolerance: float = 1e-3) -> Dominance:
    """Which agent decodes more of its opponent: A dominates iff
    I_{B-A} - I_{A-B} exceeds the tolerance, symmetrically for B."""
    if i_ba.unit != i_ab.unit:
        raise ValidationError(
            f"MI unit mismatch: {i_ba.unit!r} vs {i_ab.unit!r}"
        )
    if tolerance < 0:
        raise ValidationError("tolerance must be >= 0")
    diff = i_ba.value - i_ab.value
    if diff > tolerance:
        verdict = A_DOMINATES
    elif diff < -tolerance:
        verdict = B_DOMINATES
    else:
        verdict = BALANCED
    return Dominance(verdict=verdict, i_ba=i_ba, i_ab=i_ab, tolerance=tolerance)


def capacity_csv(entries, seed: int | None = None) -> str:
    """CSV report over (CapacityBound) entries with the standard columns."""
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append("game_id,states,log2_states,bound_orderings_bits,bound_labelings_bits")
    for bound in entries:
        states = "" if bound.exact_states is None else str(bound.exact_states)
        log2s = "" if bound.exact_log2_states is None else f"{bound.exact_log2_states:.10g}"
        lines.append(
            f"{bound.game_id},{states},{log2s},"
            f"{bound.upper_move_orderings:.10g},{bound.upper_cell_labelings:.10g}"
        )
    return "\n".join(lines) + "\n"
