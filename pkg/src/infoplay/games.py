"""Finite two-player placement games: board specs, states, legal moves.

Cells are numbered row-major; 0 = empty, 1 = player A's stone, 2 = player
B's stone.  A always moves first, so the stone counts of any reachable
state satisfy #A - #B in {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError

K_IN_A_ROW = "k_in_a_row"
BOARD_FULL_SCORING = "board_full_scoring"

PLAYER_A = "A"
PLAYER_B = "B"

ONGOING = "ongoing"
A_WINS = "A_wins"
B_WINS = "B_wins"
DRAW = "draw"

_STONE = {PLAYER_A: 1, PLAYER_B: 2}
_CELL_CHARS = ".AB"


@dataclass(frozen=True)
class GameSpec:
    """A rows x cols placement game.

    ``k_in_a_row`` games end when a player aligns ``k`` stones (or the
    board fills: draw).  ``board_full_scoring`` games have no win rule;
    when the board fills the player with more stones wins (A, on odd
    boards) and equal counts draw.
    """

    rows: int
    cols: int
    win_condition: str = K_IN_A_ROW
    k: int | None = 3
    labels: int = 3

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("board must have at least one cell")
        if self.win_condition not in (K_IN_A_ROW, BOARD_FULL_SCORING):
            raise ValidationError(f"unknown win condition {self.win_condition!r}")
        if self.win_condition == K_IN_A_ROW:
            if self.k is None or self.k < 1 or self.k > max(self.rows, self.cols):
                raise ValidationError(
                    f"k must lie in [1, max(rows, cols)], got {self.k!r}"
                )
        if self.labels < 3:
            raise ValidationError("placement games need at least 3 cell labels")

    @property
    def cells(self) -> int:
        return self.rows * self.cols

    @property
    def game_id(self) -> str:
        if self.win_condition == K_IN_A_ROW:
            return f"{self.rows}x{self.cols}-k{self.k}"
        return f"{self.rows}x{self.cols}-full"


def tic_tac_toe() -> GameSpec:
    return GameSpec(rows=3, cols=3, win_condition=K_IN_A_ROW, k=3)


@dataclass(frozen=True)
class GameState:
    cells: tuple
    to_move: str
    status: str = ONGOING

    def __post_init__(self):
        n_a = self.cells.count(1)
        n_b = self.cells.count(2)
        if n_a - n_b not in (0, 1):
            raise ValidationError(f"stone balance violated: {n_a} A vs {n_b} B stones")
        if self.to_move not in (PLAYER_A, PLAYER_B):
            raise ValidationError(f"bad player {self.to_move!r}")

    def key(self) -> str:
        """Stable text key for tabular agents and snapshot files."""
        return "".join(_CELL_CHARS[c] for c in self.cells) + ":" + self.to_move


def initial_state(game: GameSpec) -> GameState:
    return GameState(cells=(0,) * game.cells, to_move=PLAYER_A, status=ONGOING)


def legal_moves(state: GameState, game: GameSpec) -> list[int]:
    """Empty cells in row-major order.  Calling this on a terminal state is
    a contract violation."""
    if state.status != ONGOING:
        raise ValidationError("legal_moves called on a terminal state")
    return [i for i, c in enumerate(state.cells) if c == 0]


def _wins_through(cells: tuple, move: int, stone: int, game: GameSpec) -> bool:
    if game.win_condition != K_IN_A_ROW:
        return False
    k = game.k
    r0, c0 = divmod(move, game.cols)
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        run = 1
        for sign in (1, -1):
            r, c = r0 + sign * dr, c0 + sign * dc
            while 0 <= r < game.rows and 0 <= c < game.cols and cells[r * game.cols + c] == stone:
                run += 1
                r += sign * dr
                c += sign * dc
        if run >= k:
            return True
    return False


def apply_move(state: GameState, move: int, game: GameSpec) -> GameState:
    if state.status != ONGOING:
        raise ValidationError("cannot move in a terminal state")
    if not (0 <= move < game.cells) or state.cells[move] != 0:
        raise ValidationError(f"illegal move {move!r}")
    stone = _STONE[state.to_move]
    cells = state.cells[:move] + (stone,) + state.cells[move + 1:]
    if _wins_through(cells, move, stone, game):
        status = A_WINS if state.to_move == PLAYER_A else B_WINS
    elif 0 not in cells:
        if game.win_condition == BOARD_FULL_SCORING:
            n_a, n_b = cells.count(1), cells.count(2)
            status = A_WINS if n_a > n_b else (B_WINS if n_b > n_a else DRAW)
        else:
            status = DRAW
    else:
        status = ONGOING
    next_player = PLAYER_B if state.to_move == PLAYER_A else PLAYER_A
    return GameState(cells=cells, to_move=next_player, status=status)
