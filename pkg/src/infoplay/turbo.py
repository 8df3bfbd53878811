"""Reference iterative decoder: recursive systematic convolutional coding,
memoryless channels, exact log-MAP (BCJR) component decoding, and the
parallel-concatenated turbo loop with explicit extrinsic exchange.

Polynomials use the standard octal convention: bit ``memory - d`` of the
integer is the coefficient of D^d, so (7, 5) with memory 2 is the
canonical feedback 1+D+D^2 / feedforward 1+D^2 component code.

The forward/backward recursions operate on a batch axis so independent
blocks decode together; results are identical to decoding each block
alone because blocks never mix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import LLR_CLAMP, LlrBlock, _llr_information, _seed_sequence
from .errors import ValidationError

AWGN_BPSK = "awgn_bpsk"
BSC = "bsc"

_NEG_INF = -np.inf


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class RscCode:
    """A rate-1/2 recursive systematic convolutional component code."""

    feedback_poly: int = 0o7
    feedforward_poly: int = 0o5
    memory: int = 2

    def __post_init__(self):
        m = self.memory
        if m < 1:
            raise ValidationError("memory must be >= 1")
        if not (1 << m) <= self.feedback_poly < (1 << (m + 1)):
            raise ValidationError(
                "feedback polynomial must have degree <= memory and a nonzero constant term"
            )
        if not 1 <= self.feedforward_poly < (1 << (m + 1)):
            raise ValidationError("feedforward polynomial degree must be <= memory")

    @property
    def n_states(self) -> int:
        return 1 << self.memory


class _Trellis:
    """Precomputed transition tables for one RSC code.

    State bits live below the input bit in the tap register, newest first,
    so state s with input u forms the register (u << m) | s and the next
    state is (a << (m-1)) | (s >> 1) where a is the feedback-filtered bit
    that actually enters the shift register.
    """

    def __init__(self, code: RscCode):
        m = code.memory
        n = code.n_states
        self.code = code
        self.next_state = np.zeros((2, n), dtype=np.intp)
        self.parity_sym = np.zeros((2, n))  # BPSK symbol of the parity bit
        self.term_bit = np.zeros(n, dtype=np.intp)  # input forcing a zero into the register
        for s in range(n):
            for u in (0, 1):
                a = _parity(code.feedback_poly & ((u << m) | s))
                p = _parity(code.feedforward_poly & ((a << m) | s))
                self.next_state[u, s] = (a << (m - 1)) | (s >> 1)
                self.parity_sym[u, s] = 1.0 - 2.0 * p
                if a == 0:
                    self.term_bit[s] = u
        # exactly two incoming edges per state for a binary trellis
        self.in_u = np.zeros((n, 2), dtype=np.intp)
        self.in_s = np.zeros((n, 2), dtype=np.intp)
        fill = np.zeros(n, dtype=np.intp)
        for s in range(n):
            for u in (0, 1):
                t = self.next_state[u, s]
                self.in_u[t, fill[t]] = u
                self.in_s[t, fill[t]] = s
                fill[t] += 1
        if not (fill == 2).all():
            raise ValidationError("degenerate trellis: states must have two incoming edges")


_TRELLIS_CACHE: dict[RscCode, _Trellis] = {}


def _trellis(code: RscCode) -> _Trellis:
    if code not in _TRELLIS_CACHE:
        _TRELLIS_CACHE[code] = _Trellis(code)
    return _TRELLIS_CACHE[code]


def rsc_encode(bits, code: RscCode, terminate: bool = True):
    """Encode ``bits``, returning (systematic, parity) arrays.

    With termination the trellis is driven back to the zero state, which
    appends ``memory`` tail bits to both outputs.
    """
    u = np.asarray(bits)
    if u.ndim != 1 or u.size == 0:
        raise ValidationError("input bits must be a non-empty 1-D vector")
    if not np.isin(u, (0, 1)).all():
        raise ValidationError("input bits must be 0/1")
    tr = _trellis(code)
    m = code.memory
    sys_out = list(u.astype(int))
    par_out = []
    s = 0
    for b in sys_out:
        par_out.append(0 if tr.parity_sym[b, s] > 0 else 1)
        s = tr.next_state[b, s]
    if terminate:
        for _ in range(m):
            b = int(tr.term_bit[s])
            sys_out.append(b)
            par_out.append(0 if tr.parity_sym[b, s] > 0 else 1)
            s = tr.next_state[b, s]
        assert s == 0
    return np.array(sys_out, dtype=np.int8), np.array(par_out, dtype=np.int8)


@dataclass(frozen=True, eq=False)
class Interleaver:
    """A bijective permutation of block positions."""

    permutation: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.intp)
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValidationError("permutation must be a bijection on [0, N)")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "_inverse", np.argsort(perm))

    def __len__(self) -> int:
        return self.permutation.size

    def interleave(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[..., self.permutation]

    def deinterleave(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[..., self._inverse]


def random_interleaver(n: int, seed) -> Interleaver:
    return Interleaver(np.random.default_rng(seed).permutation(n))


def s_random_interleaver(n: int, seed, s: int | None = None, max_tries: int = 1000) -> Interleaver:
    """Spread interleaver: positions within distance s map at least s apart.

    Default spread is floor(sqrt(n/2)).  Seeded greedy placement; when it
    gets stuck, the unplaced values are reshuffled to the front of the
    next attempt so the hard cases are placed first.  Deterministic for a
    fixed seed.
    """
    if s is None:
        s = int(np.sqrt(n / 2))
    rng = np.random.default_rng(seed)
    vector = list(rng.permutation(n))
    for _ in range(max_tries):
        candidates = list(vector)
        perm: list[int] = []
        while candidates:
            for idx, c in enumerate(candidates):
                if all(abs(c - r) >= s for r in perm[-s:]):
                    perm.append(c)
                    del candidates[idx]
                    break
            else:
                break
        if not candidates:
            return Interleaver(np.array(perm))
        rng.shuffle(candidates)
        vector = candidates + perm
    raise ValidationError(f"could not build an S-random interleaver with s={s} for n={n}")


@dataclass(frozen=True)
class ChannelModel:
    """A memoryless binary-input channel.

    ``awgn_bpsk``: parameter is Eb/N0 in dB; the noise variance also
    depends on the code rate of the transmitted stream, so ``rate`` must
    be set to the overall code rate (1.0 for uncoded).
    ``bsc``: parameter is the flip probability in [0, 0.5].
    """

    kind: str
    parameter: float
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in (AWGN_BPSK, BSC):
            raise ValidationError(f"unknown channel kind {self.kind!r}")
        if not np.isfinite(self.parameter):
            raise ValidationError("channel parameter must be finite")
        if self.kind == BSC and not (0.0 <= self.parameter <= 0.5):
            raise ValidationError("BSC flip probability must lie in [0, 0.5]")
        if not (0.0 < self.rate <= 1.0):
            raise ValidationError("code rate must lie in (0, 1]")

    def noise_variance(self) -> float:
        if self.kind != AWGN_BPSK:
            raise ValidationError("noise variance is defined for AWGN only")
        ebn0 = 10.0 ** (self.parameter / 10.0)
        return 1.0 / (2.0 * self.rate * ebn0)


def transmit(symbols, channel: ChannelModel, seed) -> LlrBlock:
    """Send bits over the channel; returns received LLRs with the truth
    attached.  BPSK maps 0 -> +1, 1 -> -1; deterministic given the seed."""
    bits = np.asarray(symbols)
    if bits.ndim != 1 or bits.size == 0:
        raise ValidationError("symbols must be a non-empty 1-D bit vector")
    if not np.isin(bits, (0, 1)).all():
        raise ValidationError("symbols must be 0/1")
    rng = np.random.default_rng(seed)
    x = 1.0 - 2.0 * bits
    if channel.kind == AWGN_BPSK:
        var = channel.noise_variance()
        y = x + rng.normal(0.0, np.sqrt(var), size=bits.size)
        llrs = 2.0 * y / var
    else:
        p = channel.parameter
        received = np.where(rng.random(bits.size) < p, 1 - bits, bits)
        magnitude = LLR_CLAMP if p == 0.0 else np.log((1.0 - p) / p)
        llrs = (1.0 - 2.0 * received) * magnitude
    return LlrBlock(llrs, bits)


def _bcjr_batch(ls, lp, la, code: RscCode, terminated: bool, exact: bool = True):
    """Log-MAP forward/backward over a batch of blocks.

    ls, lp: (B, K) channel LLRs for systematic and parity streams, K
    counting tail steps when terminated; la: (B, N) a-priori LLRs on the
    information bits.  Returns (B, N) a-posteriori LLRs.  ``exact=False``
    switches max* to a plain max (max-log approximation).
    """
    tr = _trellis(code)
    n_states = code.n_states
    batch, k_total = ls.shape
    n_info = la.shape[1]
    acc = np.logaddexp if exact else np.maximum

    xu = np.array([1.0, -1.0])  # BPSK symbol of input bit u
    # branch metrics gamma[b, k, u, s]
    lsa = ls.copy()
    lsa[:, :n_info] += la
    gamma = 0.5 * lsa[:, :, None, None] * xu[None, None, :, None] + \
        0.5 * lp[:, :, None, None] * tr.parity_sym[None, None, :, :]
    if terminated:
        # tail inputs are forced per state; mask the other edge off
        forced = np.zeros((2, n_states), dtype=bool)
        forced[tr.term_bit, np.arange(n_states)] = True
        gamma[:, n_info:, ~forced] = _NEG_INF

    alpha = np.full((k_total + 1, batch, n_states), _NEG_INF)
    alpha[0, :, 0] = 0.0
    for k in range(k_total):
        cand = alpha[k][:, None, :] + gamma[:, k]
        nxt = acc(cand[:, tr.in_u[:, 0], tr.in_s[:, 0]], cand[:, tr.in_u[:, 1], tr.in_s[:, 1]])
        alpha[k + 1] = nxt - nxt.max(axis=1, keepdims=True)

    beta = np.full((batch, n_states), _NEG_INF)
    if terminated:
        beta[:, 0] = 0.0
    else:
        beta[:] = 0.0
    app = np.empty((batch, n_info))
    for k in range(k_total - 1, -1, -1):
        edge = gamma[:, k] + beta[:, tr.next_state]  # (B, 2, S)
        if k < n_info:
            metric = alpha[k][:, None, :] + edge
            app[:, k] = acc.reduce(metric[:, 0, :], axis=1) - acc.reduce(metric[:, 1, :], axis=1)
        beta = acc(edge[:, 0, :], edge[:, 1, :])
        beta -= beta.max(axis=1, keepdims=True)
    return app


def bcjr_decode(
    channel_sys: LlrBlock,
    channel_par: LlrBlock,
    apriori: LlrBlock,
    code: RscCode,
    terminated: bool = True,
    exact: bool = True,
):
    """One soft-in/soft-out component decoding pass.

    Returns (aposteriori, extrinsic) LlrBlocks over the information bits.
    The decomposition L_app = L_ch_sys + L_apriori + L_extrinsic holds per
    bit, which also makes extrinsic[n] independent of apriori[n].
    """
    n_info = len(apriori)
    expected = n_info + (code.memory if terminated else 0)
    if len(channel_sys) != expected or len(channel_par) != expected:
        raise ValidationError(
            f"channel streams must have length {expected} "
            f"(got {len(channel_sys)} systematic, {len(channel_par)} parity)"
        )
    app = _bcjr_batch(
        channel_sys.llrs[None, :],
        channel_par.llrs[None, :],
        apriori.llrs[None, :],
        code,
        terminated,
        exact,
    )[0]
    truth = channel_sys.truth[:n_info]
    extrinsic = app - apriori.llrs - channel_sys.llrs[:n_info]
    return LlrBlock(app, truth), LlrBlock(extrinsic, truth)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    i_e_dec1: float
    i_e_dec2: float
    ber: float


@dataclass(frozen=True)
class TurboIterationTrace:
    block: int
    records: tuple

    def __post_init__(self):
        iters = [r.iteration for r in self.records]
        if iters != sorted(set(iters)):
            raise ValidationError("iteration indices must be strictly increasing")
        for r in self.records:
            # a single block below the pinch-off SNR can measure ber
            # slightly above the 0.5 coin-flip mean, so only [0, 1] is hard
            if not (0.0 <= r.ber <= 1.0 and 0.0 <= r.i_e_dec1 <= 1.0 and 0.0 <= r.i_e_dec2 <= 1.0):
                raise ValidationError("trace fields out of range")

    def ber_at(self, iteration: int) -> float:
        for r in self.records:
            if r.iteration == iteration:
                return r.ber
        raise KeyError(iteration)


@dataclass(frozen=True, eq=False)
class TurboCodeword:
    """Rate-1/3 parallel concatenation: systematic and first parity are
    terminated (length N + memory), the interleaved encoder is left open
    (length N)."""

    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    info_bits: np.ndarray

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.systematic, self.parity1, self.parity2])


def turbo_encode(bits, code: RscCode, interleaver: Interleaver) -> TurboCodeword:
    u = np.asarray(bits)
    if u.size != len(interleaver):
        raise ValidationError("interleaver length must equal the information length")
    sys1, par1 = rsc_encode(u, code, terminate=True)
    _, par2 = rsc_encode(interleaver.interleave(u), code, terminate=False)
    return TurboCodeword(systematic=sys1, parity1=par1, parity2=par2, info_bits=u.astype(np.int8))


def _split_llrs(rx: LlrBlock, n: int, m: int):
    lens = (n + m, n + m, n)
    if len(rx) != sum(lens):
        raise ValidationError(f"expected {sum(lens)} received LLRs, got {len(rx)}")
    edges = np.cumsum((0,) + lens)
    return tuple(
        LlrBlock(rx.llrs[a:b], rx.truth[a:b]) for a, b in zip(edges[:-1], edges[1:])
    )


def _turbo_iterations(ls, lp1, lp2, truth, interleaver, code, max_iters, exact=True):
    """Shared batched loop: returns (records per iteration per block, decoded bits)."""
    batch, _ = ls.shape
    n = len(interleaver)
    ls_inner = interleaver.interleave(ls[:, :n])
    truth_inner = interleaver.interleave(truth)
    ext2_outer = np.zeros((batch, n))
    history = []
    decoded = None
    for it in range(1, max_iters + 1):
        app1 = _bcjr_batch(ls, lp1, ext2_outer, code, terminated=True, exact=exact)
        ext1 = np.clip(app1 - ext2_outer - ls[:, :n], -LLR_CLAMP, LLR_CLAMP)
        la2 = interleaver.interleave(ext1)
        app2 = _bcjr_batch(ls_inner, lp2, la2, code, terminated=False, exact=exact)
        ext2 = np.clip(app2 - la2 - ls_inner, -LLR_CLAMP, LLR_CLAMP)
        ext2_outer = interleaver.deinterleave(ext2)
        decoded = (interleaver.deinterleave(app2) < 0).astype(np.int8)
        rows = []
        for b in range(batch):
            rows.append(
                IterationRecord(
                    iteration=it,
                    i_e_dec1=_llr_information(ext1[b], truth[b]),
                    i_e_dec2=_llr_information(ext2[b], truth_inner[b]),
                    ber=float((decoded[b] != truth[b]).mean()),
                )
            )
        history.append(rows)
    return history, decoded


def turbo_decode(
    received: LlrBlock,
    interleaver: Interleaver,
    code: RscCode,
    max_iters: int = 8,
    exact: bool = True,
):
    """Iteratively decode one received rate-1/3 block.

    ``received`` holds the channel LLRs for [systematic | parity1 |
    parity2] as produced by transmitting ``TurboCodeword.concatenated()``.
    Returns (TurboIterationTrace, decoded info bits); BER in the trace is
    measured on information bits only, against the truth carried by the
    block.
    """
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1")
    n, m = len(interleaver), code.memory
    rx_sys, rx_par1, rx_par2 = _split_llrs(received, n, m)
    history, decoded = _turbo_iterations(
        rx_sys.llrs[None, :],
        rx_par1.llrs[None, :],
        rx_par2.llrs[None, :],
        rx_sys.truth[None, :n],
        interleaver,
        code,
        max_iters,
        exact,
    )
    trace = TurboIterationTrace(block=0, records=tuple(rows[0] for rows in history))
    return trace, decoded[0]


def simulate_turbo(
    n_info: int,
    ebn0_db: float,
    n_blocks: int,
    max_iters: int,
    seed,
    code: RscCode = RscCode(),
    interleaver_kind: str = "uniform",
    exact: bool = True,
) -> list[TurboIterationTrace]:
    """Encode, transmit, and decode ``n_blocks`` independent blocks over an
    AWGN channel at the given Eb/N0, decoding all blocks in one batch.

    Traces come back in block order; the per-block results are identical
    to running ``turbo_decode`` on each block alone.
    """
    root = _seed_sequence(seed)
    ss_perm, ss_bits, ss_noise = root.spawn(3)
    if interleaver_kind == "uniform":
        interleaver = random_interleaver(n_info, ss_perm)
    elif interleaver_kind == "s_random":
        interleaver = s_random_interleaver(n_info, ss_perm)
    else:
        raise ValidationError(f"unknown interleaver kind {interleaver_kind!r}")
    channel = ChannelModel(kind=AWGN_BPSK, parameter=ebn0_db, rate=1.0 / 3.0)

    bit_rng = np.random.default_rng(ss_bits)
    ls = np.empty((n_blocks, n_info + code.memory))
    lp1 = np.empty_like(ls)
    lp2 = np.empty((n_blocks, n_info))
    truth = np.empty((n_blocks, n_info), dtype=np.int8)
    for b, ss in enumerate(ss_noise.spawn(n_blocks)):
        bits = bit_rng.integers(0, 2, n_info)
        cw = turbo_encode(bits, code, interleaver)
        rx = transmit(cw.concatenated(), channel, ss)
        rx_sys, rx_par1, rx_par2 = _split_llrs(rx, n_info, code.memory)
        ls[b], lp1[b], lp2[b] = rx_sys.llrs, rx_par1.llrs, rx_par2.llrs
        truth[b] = bits
    history, _ = _turbo_iterations(ls, lp1, lp2, truth, interleaver, code, max_iters, exact)
    return [
        TurboIterationTrace(block=b, records=tuple(rows[b] for rows in history))
        for b in range(n_blocks)
    ]


def trace_csv(traces, seed: int | None = None) -> str:
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append("block,iteration,i_e_dec1,i_e_dec2,ber")
    for trace in traces:
        for r in trace.records:
            lines.append(
                f"{trace.block},{r.iteration},{r.i_e_dec1:.10g},{r.i_e_dec2:.10g},{r.ber:.10g}"
            )
    return "\n".join(lines) + "\n"
