"""EXIT-chart machinery: measure a component decoder's extrinsic transfer
curve, test tunnel openness between two curves, and iterate the staircase
decoding trajectory.

Curves are always stored untransposed as (I_A -> I_E) samples; the second
decoder's curve is transposed only at analysis and plot time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import _llr_information, _seed_sequence, sample_consistent_gaussian_apriori
from .errors import NumericalContractError, ValidationError
from .turbo import ChannelModel, RscCode, _bcjr_batch, rsc_encode, transmit

MONOTONE_DIP_TOLERANCE = 0.02
TUNNEL_EPSILON = 1e-3
TRAJECTORY_EPSILON = 1e-2

OPEN = "open"
PINCHED = "pinched"


def _isotonic(values: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators fit to a non-decreasing sequence (uniform
    weights)."""
    level = list(values.astype(float))
    weight = [1.0] * len(level)
    i = 0
    while i < len(level) - 1:
        if level[i] > level[i + 1] + 1e-15:
            merged = (level[i] * weight[i] + level[i + 1] * weight[i + 1]) / (
                weight[i] + weight[i + 1]
            )
            level[i:i + 2] = [merged]
            weight[i:i + 2] = [weight[i] + weight[i + 1]]
            if i > 0:
                i -= 1
        else:
            i += 1
    out = []
    for lv, w in zip(level, weight):
        out.extend([lv] * int(w))
    return np.array(out)


@dataclass(frozen=True)
class ExitCurve:
    """Sampled (I_A, I_E) transfer function of one component decoder."""

    points: tuple
    label: str = ""
    mc_samples: int = 0

    def __post_init__(self):
        pts = tuple((float(a), float(e)) for a, e in self.points)
        if len(pts) < 2:
            raise ValidationError("an EXIT curve needs at least two points")
        ia = np.array([p[0] for p in pts])
        ie = np.array([p[1] for p in pts])
        if not ((0.0 <= ia).all() and (ia <= 1.0).all() and (0.0 <= ie).all() and (ie <= 1.0).all()):
            raise ValidationError("curve coordinates must lie in the unit square")
        if not (np.diff(ia) > 0).all():
            raise ValidationError("I_A grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def ia(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def ie(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def monotone_ie(self) -> np.ndarray:
        """I_E values after isotonic repair of Monte Carlo dips.

        Dips beyond MONOTONE_DIP_TOLERANCE are a numerical-contract
        violation, not estimation noise.
        """
        ie = self.ie
        iso = _isotonic(ie)
        worst = float(np.max(np.abs(iso - ie)))
        if worst > MONOTONE_DIP_TOLERANCE:
            raise NumericalContractError(
                f"curve {self.label!r} is non-monotone beyond tolerance "
                f"({worst:.4f} > {MONOTONE_DIP_TOLERANCE})"
            )
        return iso

    def evaluate(self, x) -> np.ndarray:
        """Monotone piecewise-linear interpolation of I_E at I_A = x,
        clamped to the sampled range at the ends."""
        return np.interp(np.asarray(x, dtype=float), self.ia, self.monotone_ie())

    def inverse(self, y) -> np.ndarray:
        """Generalized inverse: the smallest I_A with I_E >= y.

        Values above the curve's maximum output are unreachable and map to
        +inf.
        """
        ia = self.ia
        ie = self.monotone_ie()
        y = np.atleast_1d(np.asarray(y, dtype=float))
        idx = np.searchsorted(ie, y, side="left")
        safe = np.clip(idx, 1, len(ie) - 1)
        lo, hi = ie[safe - 1], ie[safe]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = (y - lo) / (hi - lo)
        x = ia[safe - 1] + frac * (ia[safe] - ia[safe - 1])
        x = np.where(idx == 0, ia[0], x)
        return np.where(y > ie[-1], np.inf, x)


@dataclass(frozen=True)
class TunnelReport:
    status: str
    min_gap: float
    pinch_point: tuple | None
    epsilon: float

    def __post_init__(self):
        if self.status not in (OPEN, PINCHED):
            raise ValidationError(f"bad tunnel status {self.status!r}")
        if (self.status == PINCHED) != (self.pinch_point is not None):
            raise ValidationError("pinch_point must be present exactly when pinched")


@dataclass(frozen=True)
class Trajectory:
    steps: tuple
    converged: bool


def measure_exit_curve(
    code: RscCode,
    channel: ChannelModel,
    ia_grid,
    samples_per_point: int,
    seed,
    label: str = "decoder",
    block_len: int = 1000,
) -> ExitCurve:
    """Monte Carlo EXIT transfer curve of one BCJR component decoder.

    For each a-priori information value in ``ia_grid``: draw random
    information bits, encode with a terminated trellis, transmit over the
    channel, synthesize consistent-Gaussian a-priori LLRs at that I_A,
    run one BCJR pass, and measure the extrinsic output information over
    all ``samples_per_point`` bits.  Grid points use independently derived
    seeds, so the curve is reproducible bit for bit.
    """
    grid = np.asarray(ia_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValidationError("ia_grid must hold at least two points")
    if not ((0.0 <= grid).all() and (grid < 1.0).all() and (np.diff(grid) > 0).all()):
        raise ValidationError("ia_grid must be sorted and within [0, 1)")
    if samples_per_point < 1000:
        raise ValidationError("samples_per_point must be >= 1000")
    n_blocks = (samples_per_point + block_len - 1) // block_len
    root = _seed_sequence(seed)
    points = []
    for ss, ia in zip(root.spawn(len(grid)), grid):
        ss_bits, ss_chan, ss_apriori = ss.spawn(3)
        bits = np.random.default_rng(ss_bits).integers(0, 2, (n_blocks, block_len))
        encoded = [rsc_encode(row, code) for row in bits]
        sys_bits = np.array([s for s, _ in encoded])
        par_bits = np.array([p for _, p in encoded])
        rx = transmit(
            np.concatenate([sys_bits.ravel(), par_bits.ravel()]), channel, ss_chan
        )
        k = sys_bits.shape[1]
        ls = rx.llrs[: n_blocks * k].reshape(n_blocks, k)
        lp = rx.llrs[n_blocks * k:].reshape(n_blocks, k)
        apriori = sample_consistent_gaussian_apriori(bits.ravel(), float(ia), ss_apriori)
        la = apriori.llrs.reshape(n_blocks, block_len)
        app = _bcjr_batch(ls, lp, la, code, terminated=True)
        ext = app - la - ls[:, :block_len]
        i_e = _llr_information(
            np.clip(ext.ravel(), -50.0, 50.0)[:samples_per_point],
            bits.ravel()[:samples_per_point],
        )
        points.append((float(ia), i_e))
    return ExitCurve(points=tuple(points), label=label, mc_samples=samples_per_point)


def tunnel_analysis(
    curve_a: ExitCurve,
    curve_b: ExitCurve,
    epsilon: float = TUNNEL_EPSILON,
) -> TunnelReport:
    """Gap between decoder A's curve and decoder B's transposed curve.

    The gap g(x) = curve_a(x) - curve_b^{-1}(x) is piecewise linear, so it
    is evaluated exactly: on every interior breakpoint of either curve
    (the endpoints (0,0) and (1,1) are where the curves are allowed to
    meet) plus the interior zero crossings of any segment whose ends
    straddle zero.  The tunnel is pinched when the minimum interior gap
    falls to ``epsilon`` or below; the pinch point is the first x where
    that happens, which is where the staircase trajectory stalls.

    Verdicts hold on the jointly measured domain: when a Monte Carlo
    curve stops short of I_A = 1, nothing is asserted beyond its own top
    sample or the highest output the partner was observed to produce
    (sample close to 1 for conclusions near the corner).
    """
    x_hi = float(curve_a.ia[-1])
    if curve_b.ia[-1] < 1.0:
        # beyond its top observed output, curve_b's inverse is unknown
        # rather than unreachable
        x_hi = min(x_hi, float(curve_b.monotone_ie()[-1]))
    interior = sorted(
        {float(x) for x in curve_a.ia if 0.0 < x < 1.0}
        | {float(y) for y in curve_b.monotone_ie() if 0.0 < y < 1.0}
        | ({0.5} if x_hi >= 0.5 else set())
    )
    interior = [x for x in interior if x <= x_hi]
    xs = np.unique(np.array([0.0] + interior + [x_hi]))

    def gap_at(x):
        # outputs decoder B can never produce get inverse 1.0, the largest
        # possible input, so the gap stays a finite deficit
        return curve_a.evaluate(x) - np.minimum(curve_b.inverse(x), 1.0)

    gap = gap_at(xs)
    # refine: a sign change strictly inside a segment is a crossing the
    # breakpoints themselves miss
    extra = []
    for i in range(len(xs) - 1):
        g0, g1 = gap[i], gap[i + 1]
        if g0 > 0.0 and g1 < 0.0:
            x = xs[i] + (xs[i + 1] - xs[i]) * g0 / (g0 - g1)
            if 0.0 < x < 1.0:
                extra.append(float(x))
    if extra:
        xs = np.sort(np.concatenate([xs, extra]))
        gap = gap_at(xs)
    inner = (xs > 0.0) & (xs < 1.0)
    if not inner.any():
        # partner curve never produces a usable output: shut at the origin
        return TunnelReport(
            status=PINCHED,
            min_gap=float(gap_at(np.array([0.0]))[0]),
            pinch_point=(0.0, float(curve_a.evaluate(0.0))),
            epsilon=epsilon,
        )
    min_gap = float(np.min(gap[inner]))
    hits = np.nonzero(inner & (gap <= epsilon))[0]
    if hits.size:
        x = float(xs[hits[0]])
        return TunnelReport(
            status=PINCHED,
            min_gap=min_gap,
            pinch_point=(x, float(curve_a.evaluate(x))),
            epsilon=epsilon,
        )
    return TunnelReport(status=OPEN, min_gap=min_gap, pinch_point=None, epsilon=epsilon)


def decoding_trajectory(
    curve_a: ExitCurve,
    curve_b: ExitCurve,
    max_steps: int = 64,
    epsilon: float = TRAJECTORY_EPSILON,
) -> Trajectory:
    """Staircase iteration i_e1 <- curve_a(i_e2); i_e2 <- curve_b(i_e1),
    started from (0, 0).

    Stops at a fixed point (componentwise change below epsilon), in the
    epsilon-neighborhood of (1, 1), or after max_steps; ``converged`` says
    whether the endpoint is the (1, 1) corner.
    """
    if max_steps < 1:
        raise ValidationError("max_steps must be >= 1")
    steps = []
    ie1 = ie2 = 0.0
    for _ in range(max_steps):
        new_ie1 = float(curve_a.evaluate(ie2))
        new_ie2 = float(curve_b.evaluate(new_ie1))
        steps.append((new_ie1, new_ie2))
        stalled = abs(new_ie1 - ie1) < epsilon and abs(new_ie2 - ie2) < epsilon
        ie1, ie2 = new_ie1, new_ie2
        if stalled or (1.0 - ie1 < epsilon and 1.0 - ie2 < epsilon):
            break
    converged = 1.0 - ie1 < epsilon and 1.0 - ie2 < epsilon
    return Trajectory(steps=tuple(steps), converged=converged)


def exit_curve_csv(curves, seed: int | None = None) -> str:
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append("label,i_a,i_e,mc_samples,seed")
    seed_field = "" if seed is None else str(seed)
    for curve in curves:
        for ia, ie in curve.points:
            lines.append(f"{curve.label},{ia:.10g},{ie:.10g},{curve.mc_samples},{seed_field}")
    return "\n".join(lines) + "\n"


def _svg_xy(ia: float, ie: float, size: int, margin: int) -> tuple:
    span = size - 2 * margin
    return margin + ia * span, size - margin - ie * span


def _polyline(pairs, size, margin, stroke, dasharray=None) -> str:
    pts = " ".join(
        f"{x:.2f},{y:.2f}" for x, y in (_svg_xy(a, e, size, margin) for a, e in pairs)
    )
    dash = f' stroke-dasharray="{dasharray}"' if dasharray else ""
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{dash} points="{pts}" />'


def render_exit_chart(
    curve_a: ExitCurve,
    curve_b: ExitCurve | None = None,
    trajectory: Trajectory | None = None,
    size: int = 480,
    margin: int = 48,
) -> str:
    """Plain-text SVG of the unit square with curve A, curve B transposed,
    and an optional staircase overlay.  Element order and float formatting
    are fixed so identical inputs give byte-identical output."""
    span = size - 2 * margin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="white" stroke="black" stroke-width="1" />',
    ]
    for frac in (0.25, 0.5, 0.75):
        x = margin + frac * span
        parts.append(
            f'<line x1="{x:.2f}" y1="{margin}" x2="{x:.2f}" y2="{size - margin}" '
            'stroke="#dddddd" stroke-width="0.5" />'
        )
        y = size - margin - frac * span
        parts.append(
            f'<line x1="{margin}" y1="{y:.2f}" x2="{size - margin}" y2="{y:.2f}" '
            'stroke="#dddddd" stroke-width="0.5" />'
        )
    if trajectory is not None and trajectory.steps:
        path = [(0.0, 0.0)]
        prev_ie2 = 0.0
        for ie1, ie2 in trajectory.steps:
            path.append((prev_ie2, ie1))  # vertical rise on decoder 1's curve
            path.append((ie2, ie1))  # horizontal step to decoder 2's curve
            prev_ie2 = ie2
        parts.append(_polyline(path, size, margin, "#888888", dasharray="3,2"))
    parts.append(_polyline(curve_a.points, size, margin, "#1f6fb2"))
    if curve_b is not None:
        transposed = [(ie, ia) for ia, ie in curve_b.points]
        parts.append(_polyline(transposed, size, margin, "#b23a1f"))
    label_y = size - margin + 28
    parts.append(
        f'<text x="{size // 2}" y="{label_y}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">I_A({curve_a.label})</text>'
    )
    parts.append(
        f'<text x="14" y="{size // 2}" text-anchor="middle" font-family="monospace" '
        f'font-size="12" transform="rotate(-90 14 {size // 2})">I_E({curve_a.label})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
