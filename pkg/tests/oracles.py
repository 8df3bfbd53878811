"""Independent reference implementations used as test oracles.

Everything here is deliberately written from scratch (explicit registers,
exhaustive enumeration, plain recursion) so it shares no code path with
the library it checks.
"""

import numpy as np
from scipy.special import logsumexp

from infoplay.games import A_WINS, B_WINS, DRAW, apply_move, legal_moves


def ref_encode_75(bits, terminate=True):
    """Bit-level (7,5) RSC encoder with an explicit two-cell register."""
    r1 = r2 = 0
    sys_out, par_out = [], []
    for u in bits:
        a = u ^ r1 ^ r2
        sys_out.append(u)
        par_out.append(a ^ r2)
        r1, r2 = a, r1
    if terminate:
        for _ in range(2):
            u = r1 ^ r2  # forces the register input to zero
            a = 0
            sys_out.append(u)
            par_out.append(a ^ r2)
            r1, r2 = a, r1
        assert (r1, r2) == (0, 0)
    return np.array(sys_out), np.array(par_out)


def brute_force_map(ls, lp, la, n_info):
    """Exhaustive MAP a-posteriori LLRs for the terminated (7,5) code."""
    metrics = np.empty(2**n_info)
    words = np.empty((2**n_info, n_info), dtype=int)
    for w in range(2**n_info):
        u = np.array([(w >> i) & 1 for i in range(n_info)])
        words[w] = u
        sys_bits, par_bits = ref_encode_75(list(u))
        x_sys = 1 - 2 * sys_bits
        x_par = 1 - 2 * par_bits
        x_u = 1 - 2 * u
        metrics[w] = 0.5 * (
            (x_sys * ls).sum() + (x_par * lp).sum() + (x_u * la).sum()
        )
    app = np.empty(n_info)
    for n in range(n_info):
        app[n] = logsumexp(metrics[words[:, n] == 0]) - logsumexp(metrics[words[:, n] == 1])
    return app


def minimax_value(state, game, cache=None):
    """Game-theoretic value from A's perspective: +1 / 0 / -1."""
    cache = {} if cache is None else cache
    if state.status != "ongoing":
        return {A_WINS: 1, B_WINS: -1, DRAW: 0}[state.status]
    key = state.key()
    if key in cache:
        return cache[key]
    children = [minimax_value(apply_move(state, m, game), game, cache)
                for m in legal_moves(state, game)]
    val = max(children) if state.to_move == "A" else min(children)
    cache[key] = val
    return val
