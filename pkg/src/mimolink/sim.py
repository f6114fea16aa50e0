"""Monte Carlo experiment engine.

An experiment is a sweep over one x-axis variable (path gain, Doppler,
sample rate, or SNR). Every sweep point simulates frames -- 120 information
bits each by default -- until it has seen target_frame_errors frame errors
or max_frames frames, whichever comes first.

Reproducibility is structural, not incidental. Each frame derives every
random quantity it needs from counter-based streams keyed by
(master_seed, experiment id, role, trial index), so frame outcomes are pure
functions of (config, trial_index). The engine may farm trials out to
worker processes in any arrangement; results are aggregated by scanning
outcomes in trial-index order and cutting off at the exact frame where the
error target is met, which makes the output bit-identical for any worker
count.

Frame chain for the FER experiments: Bernoulli bits -> QPSK -> OSTBC encode
-> time-varying correlated channel + AWGN -> combine (channel of each
block's first row, the usual quasi-static approximation) -> demodulate ->
count errors. The BER-vs-SNR experiment instead sends uncoded per-antenna
QPSK streams through a fresh i.i.d. Rayleigh matrix per symbol vector and
runs one of the zf/mmse/ml detectors.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .channel import ChannelSpec, apply_channel, channel_init
from .detect import (
    DetectionFailure,
    DetectorKind,
    ml_detect_batch,
    mmse_detect_batch,
    zf_detect_batch,
)
from .modem import QPSK_POINTS, bernoulli_bits, qpsk_demodulate, qpsk_modulate
from .numerics import RngStream, pack_stream_id
from .stbc import combine_array, encode_array, ostbc_code

__all__ = [
    "Experiment",
    "SimConfig",
    "SweepPoint",
    "SimResult",
    "run_frame",
    "run_experiment",
    "wilson_interval",
    "emit_csv",
    "parse_csv",
]


class Experiment(enum.Enum):
    FER_VS_GAIN = "fer_vs_gain"
    FER_VS_DOPPLER = "fer_vs_doppler"
    FER_VS_SAMPLE_RATE = "fer_vs_sample_rate"
    BER_VS_SNR = "ber_vs_snr"


# Stream-id experiment field. validate-fading uses 4 (see cli module).
EXPERIMENT_IDS = {
    Experiment.FER_VS_GAIN: 0,
    Experiment.FER_VS_DOPPLER: 1,
    Experiment.FER_VS_SAMPLE_RATE: 2,
    Experiment.BER_VS_SNR: 3,
}

# Stream-id role field. Fading links occupy ROLE_FADING + link_index for
# link indices 0..15, so the i.i.d.-channel role starts above them.
ROLE_BITS = 0
ROLE_NOISE = 1
ROLE_FADING = 2
ROLE_IID_CHANNEL = 18

# Trials simulated per scheduling wave. Any value gives identical results;
# this only trades cutoff overshoot against scheduling overhead.
WAVE_FRAMES = 1024

# 95% two-sided normal quantile, frozen so CSV output never shifts with
# library updates.
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment.

    code is the (n_tx, rate) pair of the OSTBC used by the FER experiments;
    detector selects the spatial-multiplexing receiver for BER-vs-SNR. The
    unused one may be None. sweep holds the x-axis values; the swept
    quantity is implied by the experiment kind.
    """

    experiment: Experiment
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    code: tuple[int, Fraction] | None = (4, Fraction(3, 4))
    detector: DetectorKind | None = None
    frame_bits: int = 120
    snr_db: float = 10.0
    sweep: tuple[float, ...] = ()
    max_frames: int = 100_000
    target_frame_errors: int = 200
    master_seed: int = 1

    def validate(self) -> None:
        if not isinstance(self.experiment, Experiment):
            raise ValueError("experiment must be an Experiment")
        self.channel.validate()
        if self.frame_bits < 2 or self.frame_bits % 2 != 0:
            raise ValueError("frame_bits must be a positive even count")
        if not (0 <= self.master_seed < 1 << 64):
            raise ValueError("master_seed must fit in 64 bits")
        if len(self.sweep) == 0:
            raise ValueError("sweep must not be empty")
        if any(not math.isfinite(v) for v in self.sweep):
            raise ValueError("sweep values must be finite")
        if any(b <= a for a, b in zip(self.sweep, self.sweep[1:])):
            raise ValueError("sweep must be strictly increasing")
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")
        if self.target_frame_errors < 1:
            raise ValueError("target_frame_errors must be at least 1")
        n_symbols = self.frame_bits // 2
        if self.experiment is Experiment.BER_VS_SNR:
            if self.detector is None:
                raise ValueError("ber_vs_snr needs a detector")
            if n_symbols % self.channel.n_tx != 0:
                raise ValueError("frame symbols must fill whole transmit vectors")
            if self.detector in (DetectorKind.ZF, DetectorKind.MMSE) and self.channel.n_rx < self.channel.n_tx:
                raise ValueError(f"{self.detector.value} needs n_rx >= n_tx")
        else:
            if self.code is None:
                raise ValueError("FER experiments need an OSTBC code")
            code = ostbc_code(*self.code)
            if code.n_tx != self.channel.n_tx:
                raise ValueError("code antenna count must match the channel")
            if n_symbols % code.n_symbols != 0:
                raise ValueError(
                    f"frame_bits={self.frame_bits} gives {n_symbols} symbols, "
                    f"not a multiple of the code block size {code.n_symbols}"
                )
        # Every sweep point must itself be a valid configuration.
        for x in self.sweep:
            pc = _point_config(self, x, _validate=False)
            pc.channel.validate()


def _point_config(config: SimConfig, x: float, _validate: bool = True) -> SimConfig:
    """Resolve a sweep point into a concrete single-point config."""
    exp = config.experiment
    if exp is Experiment.FER_VS_GAIN:
        ch = replace(config.channel, path_gain_db=x)
        out = replace(config, channel=ch)
    elif exp is Experiment.FER_VS_DOPPLER:
        ch = replace(config.channel, fading=replace(config.channel.fading, max_doppler_hz=x))
        out = replace(config, channel=ch)
    elif exp is Experiment.FER_VS_SAMPLE_RATE:
        ch = replace(config.channel, fading=replace(config.channel.fading, sample_rate_hz=x))
        out = replace(config, channel=ch)
    elif exp is Experiment.BER_VS_SNR:
        out = replace(config, snr_db=x)
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown experiment {exp!r}")
    if _validate:
        out.channel.validate()
    return out


def run_frame(config: SimConfig, trial_index: int) -> tuple[bool, int, int]:
    """Simulate one frame end to end.

    Returns (frame_error, bit_errors, bits). Deterministic in
    (config, trial_index): all randomness comes from streams keyed by the
    master seed, the experiment id, a fixed role tag, and the trial index.
    A detection failure (singular channel under ZF) wipes the frame: every
    bit counts as errored.
    """
    exp_id = EXPERIMENT_IDS[config.experiment]
    seed = config.master_seed

    def stream(role: int) -> RngStream:
        return RngStream(seed, pack_stream_id(exp_id, role, trial_index))

    bits = bernoulli_bits(config.frame_bits, 0.5, stream(ROLE_BITS))
    syms = qpsk_modulate(bits)

    if config.experiment is Experiment.BER_VS_SNR:
        n_tx, n_rx = config.channel.n_tx, config.channel.n_rx
        vectors = syms.reshape(-1, n_tx)
        n_vec = vectors.shape[0]
        gain = 10.0 ** (config.channel.path_gain_db / 20.0)
        h = gain * stream(ROLE_IID_CHANNEL).complex_normal((n_vec, n_rx, n_tx))
        x = vectors / math.sqrt(n_tx)
        y = np.einsum("nrt,nt->nr", h, x)
        if not math.isinf(config.snr_db):
            noise_var = 10.0 ** (-config.snr_db / 10.0)
            y = y + stream(ROLE_NOISE).complex_normal((n_vec, n_rx), var=noise_var)
        else:
            noise_var = 0.0
        try:
            if config.detector is DetectorKind.ZF:
                decided = zf_detect_batch(h, y, QPSK_POINTS)
            elif config.detector is DetectorKind.MMSE:
                decided = mmse_detect_batch(h, y, QPSK_POINTS, noise_var)
            else:
                decided = ml_detect_batch(h, y, QPSK_POINTS)
        except DetectionFailure:
            return True, config.frame_bits, config.frame_bits
        bits_hat = qpsk_demodulate(decided.ravel())
    else:
        code = ostbc_code(*config.code)
        x = encode_array(code, syms.reshape(-1, code.n_symbols))
        n_blocks, t_len, n_tx = x.shape
        rows = x.reshape(-1, n_tx)
        chan = channel_init(config.channel, stream(ROLE_FADING))
        noisy, h = apply_channel(chan, rows, config.snr_db, stream(ROLE_NOISE))
        y_blocks = noisy.samples.reshape(n_blocks, t_len, config.channel.n_rx)
        h_blocks = h[::t_len]
        s_hat = combine_array(code, y_blocks, h_blocks)
        bits_hat = qpsk_demodulate(s_hat.ravel())

    bit_errors = int(np.count_nonzero(bits_hat != bits))
    return bit_errors > 0, bit_errors, config.frame_bits


def _simulate_range(config: SimConfig, start: int, stop: int) -> list[tuple[bool, int, int]]:
    """Worker body: outcomes for trials [start, stop), in index order."""
    return [run_frame(config, t) for t in range(start, stop)]


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated counts and rates at one x value."""

    x: float
    frames: int
    frame_errors: int
    bits: int
    bit_errors: int
    fer: float
    ber: float
    ci95_fer: tuple[float, float]
    ci95_ber: tuple[float, float]
    elapsed_s: float


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    points: list[SweepPoint]


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion.

    Exact at the boundaries: (0, n) pins the lower limit to 0 and (n, n)
    the upper limit to 1.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    z2 = Z95 * Z95
    p = errors / trials
    denom = 1.0 + z2 / trials
    center = p + z2 / (2.0 * trials)
    half = Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    # The boundary cases collapse analytically (center == half at p = 0 and
    # the mirror image at p = 1) but not in floating point; pin them so the
    # interval always contains the point estimate.
    lo = 0.0 if errors == 0 else max(0.0, (center - half) / denom)
    hi = 1.0 if errors == trials else min(1.0, (center + half) / denom)
    return lo, hi


def _fold_point(
    config: SimConfig, x: float, outcomes_iter, elapsed_s: float
) -> SweepPoint:
    frames = frame_errors = bits = bit_errors = 0
    for fe, be, nb in outcomes_iter:
        frames += 1
        frame_errors += int(fe)
        bit_errors += be
        bits += nb
        if frame_errors >= config.target_frame_errors:
            break
    fer = frame_errors / frames
    ber = bit_errors / bits
    return SweepPoint(
        x=x,
        frames=frames,
        frame_errors=frame_errors,
        bits=bits,
        bit_errors=bit_errors,
        fer=fer,
        ber=ber,
        ci95_fer=wilson_interval(frame_errors, frames),
        ci95_ber=wilson_interval(bit_errors, bits),
        elapsed_s=elapsed_s,
    )


def _split_range(start: int, stop: int, parts: int) -> list[tuple[int, int]]:
    n = stop - start
    base, extra = divmod(n, parts)
    spans = []
    cursor = start
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        if size:
            spans.append((cursor, cursor + size))
            cursor += size
    return spans


def _run_point(config: SimConfig, x: float, pool: ProcessPoolExecutor | None, workers: int) -> SweepPoint:
    pc = _point_config(config, x)
    t0 = time.perf_counter()
    outcomes: list[tuple[bool, int, int]] = []
    frame_errors = 0
    next_trial = 0
    while next_trial < pc.max_frames:
        n = min(WAVE_FRAMES, pc.max_frames - next_trial)
        if pool is None or n < 2 * workers:
            wave = _simulate_range(pc, next_trial, next_trial + n)
        else:
            spans = _split_range(next_trial, next_trial + n, workers)
            wave = []
            starts = [a for a, _ in spans]
            stops = [b for _, b in spans]
            for part in pool.map(_simulate_range, [pc] * len(spans), starts, stops):
                wave.extend(part)
        outcomes.extend(wave)
        frame_errors += sum(int(fe) for fe, _, _ in wave)
        next_trial += n
        if frame_errors >= pc.target_frame_errors:
            break
    return _fold_point(pc, x, iter(outcomes), time.perf_counter() - t0)


def run_experiment(config: SimConfig, workers: int = 1) -> SimResult:
    """Run every sweep point and aggregate counts, rates, and intervals.

    workers > 1 distributes trials over a process pool. The outcome of a
    trial is a pure function of (config, trial index) and aggregation scans
    trials in index order with a deterministic cutoff, so the result is
    identical for every worker count.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    config.validate()
    points = []
    if workers == 1:
        for x in config.sweep:
            points.append(_run_point(config, x, None, 1))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for x in config.sweep:
                points.append(_run_point(config, x, pool, workers))
    return SimResult(config=config, points=points)


_CSV_HEADER = (
    "x,frames,frame_errors,fer,fer_ci_lo,fer_ci_hi,"
    "bits,bit_errors,ber,ber_ci_lo,ber_ci_hi"
)


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".6g")


def _echo_pairs(config: SimConfig) -> list[tuple[str, str]]:
    ch = config.channel
    fs = ch.fading
    code = "none" if config.code is None else f"{config.code[0]}x{config.code[1]}"
    detector = "none" if config.detector is None else config.detector.value
    return [
        ("experiment", config.experiment.value),
        ("n_tx", str(ch.n_tx)),
        ("n_rx", str(ch.n_rx)),
        ("fading_model", fs.model.value),
        ("k_factor", format(fs.k_factor, ".10g")),
        ("max_doppler_hz", format(fs.max_doppler_hz, ".10g")),
        ("los_doppler_hz", format(fs.los_doppler_hz, ".10g")),
        ("los_phase_rad", format(fs.los_phase_rad, ".10g")),
        ("sample_rate_hz", format(fs.sample_rate_hz, ".10g")),
        ("num_sinusoids", str(fs.num_sinusoids)),
        ("correlation", format(ch.correlation, ".10g")),
        ("path_gain_db", format(ch.path_gain_db, ".10g")),
        ("code", code),
        ("detector", detector),
        ("frame_bits", str(config.frame_bits)),
        ("snr_db", format(config.snr_db, ".10g")),
        ("sweep", ",".join(format(v, ".10g") for v in config.sweep)),
        ("max_frames", str(config.max_frames)),
        ("target_frame_errors", str(config.target_frame_errors)),
        ("master_seed", str(config.master_seed)),
    ]


def emit_csv(result: SimResult, config: SimConfig) -> str:
    """Render a result as CSV text.

    Header comments echo the full configuration (including the seed) as
    `# key=value` lines; data rows carry counts exactly and rates with six
    significant digits. Lines end with LF and the text ends with a newline,
    so identical configs yield byte-identical files.
    """
    lines = [f"# {k}={v}" for k, v in _echo_pairs(config)]
    lines.append(_CSV_HEADER)
    for p in result.points:
        lines.append(",".join([
            _fmt(p.x),
            _fmt(p.frames),
            _fmt(p.frame_errors),
            _fmt(p.fer),
            _fmt(p.ci95_fer[0]),
            _fmt(p.ci95_fer[1]),
            _fmt(p.bits),
            _fmt(p.bit_errors),
            _fmt(p.ber),
            _fmt(p.ci95_ber[0]),
            _fmt(p.ci95_ber[1]),
        ]))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[dict[str, str], list[dict[str, float]]]:
    """Parse emit_csv output back into (config echo, data rows).

    Count columns come back as ints, rates as floats; the echo stays as raw
    strings. Inverse of emit_csv up to float formatting.
    """
    meta: dict[str, str] = {}
    rows: list[dict[str, float]] = []
    header: list[str] | None = None
    int_cols = {"frames", "frame_errors", "bits", "bit_errors"}
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
            continue
        if header is None:
            header = line.split(",")
            continue
        values = line.split(",")
        row = {}
        for name, raw in zip(header, values):
            row[name] = int(raw) if name in int_cols else float(raw)
        rows.append(row)
    return meta, rows
