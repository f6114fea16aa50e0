"""Command line front end.

One subcommand per experiment plus a statistical self-check:

    mimolink fer-vs-gain       --gain-db -20:2:0 --out fer_gain.csv
    mimolink fer-vs-doppler    --dopplers 25,50,100 --out fer_doppler.csv
    mimolink fer-vs-samplerate --rates 1e5,2e5,...,1e7 --out fer_rate.csv
    mimolink ber-vs-snr        --detector ml --snr-db 0:4:20 --out ber.csv
    mimolink validate-fading   --fading rayleigh --samples 1000000 --out stats.csv

Sweeps are written either as an inclusive start:step:stop range or as a
comma list. Every run is fully reproducible from --seed; all defaults are
echoed into the CSV header so a result file is self-describing.

SNR convention: snr_db is total transmit symbol energy per channel use over
noise power per receive antenna. The Rician K factor defaults to 4, which is
this simulator's choice, not a measured value; set --k explicitly when it
matters.

Exit codes: 0 success, 1 invalid configuration or usage, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction

from .channel import ChannelSpec, correlation_rho
from .detect import DetectorKind
from .fading import FadingModel, FadingSpec, fading_init, validate_process
from .numerics import RngStream, pack_stream_id
from .sim import EXPERIMENT_IDS, Experiment, SimConfig, emit_csv, run_experiment

__all__ = ["main", "build_parser"]

# Stream-id experiment field for validate-fading; the four experiments use
# EXPERIMENT_IDS from the sim module.
VALIDATE_EXPERIMENT_ID = 4

_FIGURE6_RATES = "1e5,2e5,5e5,1e6,2e6,5e6,1e7"


class _Parser(argparse.ArgumentParser):
    # The interface reserves exit code 2 for runtime failures, so usage
    # errors exit 1 instead of argparse's default 2. The widened matcher
    # lets values like "-20:2:0" or "-5,-3" follow a flag without being
    # mistaken for option names ("=" still works if this ever changes).
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_sweep(text: str) -> tuple[float, ...]:
    """Parse start:step:stop (inclusive) or a comma list into sweep values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("range step must be positive")
        if stop < start:
            raise ValueError("range stop must not precede start")
        count = int(round((stop - start) / step)) + 1
        values = tuple(start + i * step for i in range(count))
        if values[-1] > stop + 1e-9 * max(1.0, abs(stop)):
            values = values[:-1]
        return values
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse_code(text: str) -> tuple[int, Fraction]:
    try:
        nt_str, rate_str = text.lower().split("x", 1)
        return int(nt_str), Fraction(rate_str)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"code must look like 2x1, 4x1/2 or 4x3/4, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser, with_workers: bool = True) -> None:
    p.add_argument("--seed", type=int, default=1, metavar="U64",
                   help="master seed; fixes every random draw (default 1)")
    p.add_argument("--out", required=True, metavar="PATH.CSV",
                   help="output CSV path")
    p.add_argument("--plot-script", metavar="PATH",
                   help="also write a gnuplot script that plots the CSV")
    if with_workers:
        p.add_argument("--workers", type=int, default=1, metavar="N",
                       help="worker processes; never changes results (default 1)")


def _add_fading(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fading", choices=["rayleigh", "rician"], default="rayleigh")
    p.add_argument("--k", type=float, default=4.0, metavar="K",
                   help="Rician K factor, linear (simulator default 4; free choice)")
    p.add_argument("--los-doppler-hz", type=float, default=0.0, metavar="F",
                   help="line-of-sight Doppler shift (0 or 100 in the standard runs)")
    p.add_argument("--los-phase-rad", type=float, default=0.0, metavar="PHI")
    p.add_argument("--num-sinusoids", type=int, default=32, metavar="M")


def _add_link(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nr", type=int, default=4, metavar="N")
    p.add_argument("--code", type=_parse_code, default="4x3/4", metavar="NTxRATE",
                   help="OSTBC design: 2x1, 3x1/2, 3x3/4, 4x1/2 or 4x3/4 (default 4x3/4)")
    p.add_argument("--correlation", default="low", metavar="LEVEL",
                   help="spatial correlation: none/low/medium/high or a coefficient in [0,1)")
    p.add_argument("--frame-bits", type=int, default=120, metavar="N")
    p.add_argument("--max-frames", type=int, default=100_000, metavar="N")
    p.add_argument("--target-errors", type=int, default=200, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimolink", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fer-vs-gain", parents=[], help="frame error rate over a path-gain sweep")
    _add_fading(p)
    _add_link(p)
    p.add_argument("--doppler-hz", type=float, default=100.0, metavar="F")
    p.add_argument("--sample-rate-hz", type=float, default=1e6, metavar="FS")
    p.add_argument("--gain-db", type=_parse_sweep, default="-20:2:0", metavar="SWEEP")
    p.add_argument("--snr-db", type=float, default=10.0, metavar="DB")
    _add_common(p)

    p = sub.add_parser("fer-vs-doppler", help="frame error rate over maximum Doppler values")
    _add_fading(p)
    _add_link(p)
    p.add_argument("--dopplers", type=_parse_sweep, default="25,50,100", metavar="SWEEP")
    p.add_argument("--sample-rate-hz", type=float, default=1e6, metavar="FS")
    p.add_argument("--gain-db", type=float, default=-5.0, metavar="DB")
    p.add_argument("--snr-db", type=float, default=10.0, metavar="DB")
    _add_common(p)

    p = sub.add_parser("fer-vs-samplerate", help="frame error rate over channel sample rates")
    _add_fading(p)
    _add_link(p)
    p.add_argument("--rates", type=_parse_sweep, default=_FIGURE6_RATES, metavar="SWEEP")
    p.add_argument("--doppler-hz", type=float, default=100.0, metavar="F")
    p.add_argument("--gain-db", type=float, default=-5.0, metavar="DB")
    p.add_argument("--snr-db", type=float, default=10.0, metavar="DB")
    _add_common(p)

    p = sub.add_parser("ber-vs-snr", help="uncoded 4x4 detector BER over an SNR sweep")
    p.add_argument("--detector", choices=[d.value for d in DetectorKind], required=True)
    p.add_argument("--snr-db", type=_parse_sweep, default="0:4:20", metavar="SWEEP")
    p.add_argument("--nt", type=int, default=4, metavar="N")
    p.add_argument("--nr", type=int, default=4, metavar="N")
    p.add_argument("--gain-db", type=float, default=0.0, metavar="DB")
    p.add_argument("--frame-bits", type=int, default=120, metavar="N")
    p.add_argument("--max-frames", type=int, default=100_000, metavar="N")
    p.add_argument("--target-errors", type=int, default=200, metavar="N")
    _add_common(p)

    p = sub.add_parser("validate-fading", help="statistical self-check of one fading process")
    _add_fading(p)
    p.add_argument("--doppler-hz", type=float, default=100.0, metavar="F")
    p.add_argument("--sample-rate-hz", type=float, default=256.0, metavar="FS")
    p.add_argument("--samples", type=int, default=1_000_000, metavar="N")
    _add_common(p, with_workers=False)

    return parser


def _fading_spec(args, doppler_hz: float, sample_rate_hz: float) -> FadingSpec:
    model = FadingModel(args.fading)
    return FadingSpec(
        model=model,
        max_doppler_hz=doppler_hz,
        sample_rate_hz=sample_rate_hz,
        num_sinusoids=args.num_sinusoids,
        k_factor=args.k if model is FadingModel.RICIAN else 0.0,
        los_doppler_hz=args.los_doppler_hz,
        los_phase_rad=args.los_phase_rad,
    )


def _fer_config(args, experiment: Experiment, doppler_hz: float,
                sample_rate_hz: float, gain_db: float, sweep) -> SimConfig:
    code_n_tx, code_rate = args.code
    channel = ChannelSpec(
        n_tx=code_n_tx,
        n_rx=args.nr,
        fading=_fading_spec(args, doppler_hz, sample_rate_hz),
        correlation=correlation_rho(args.correlation),
        path_gain_db=gain_db,
    )
    return SimConfig(
        experiment=experiment,
        channel=channel,
        code=(code_n_tx, code_rate),
        detector=None,
        frame_bits=args.frame_bits,
        snr_db=args.snr_db,
        sweep=tuple(sweep),
        max_frames=args.max_frames,
        target_frame_errors=args.target_errors,
        master_seed=args.seed,
    )


def _build_config(args) -> SimConfig:
    if args.command == "fer-vs-gain":
        return _fer_config(args, Experiment.FER_VS_GAIN, args.doppler_hz,
                           args.sample_rate_hz, args.gain_db[0], args.gain_db)
    if args.command == "fer-vs-doppler":
        return _fer_config(args, Experiment.FER_VS_DOPPLER, args.dopplers[0],
                           args.sample_rate_hz, args.gain_db, args.dopplers)
    if args.command == "fer-vs-samplerate":
        return _fer_config(args, Experiment.FER_VS_SAMPLE_RATE, args.doppler_hz,
                           args.rates[0], args.gain_db, args.rates)
    if args.command == "ber-vs-snr":
        channel = ChannelSpec(n_tx=args.nt, n_rx=args.nr, fading=FadingSpec(),
                              correlation=0.0, path_gain_db=args.gain_db)
        return SimConfig(
            experiment=Experiment.BER_VS_SNR,
            channel=channel,
            code=None,
            detector=DetectorKind(args.detector),
            frame_bits=args.frame_bits,
            snr_db=args.snr_db[0],
            sweep=tuple(args.snr_db),
            max_frames=args.max_frames,
            target_frame_errors=args.target_errors,
            master_seed=args.seed,
        )
    raise ValueError(f"unknown command {args.command!r}")


_PLOT_AXES = {
    "fer-vs-gain": ("path gain (dB)", "frame error rate", 4, 5, 6, False),
    "fer-vs-doppler": ("max Doppler (Hz)", "frame error rate", 4, 5, 6, False),
    "fer-vs-samplerate": ("sample rate (Hz)", "frame error rate", 4, 5, 6, True),
    "ber-vs-snr": ("SNR (dB)", "bit error rate", 9, 10, 11, False),
}


def _write_plot_script(path: str, csv_path: str, command: str) -> None:
    xlabel, ylabel, col, lo, hi, logx = _PLOT_AXES[command]
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set logscale y",
        "set grid",
        "set key left bottom",
    ]
    if logx:
        lines.append("set logscale x")
    lines += [
        f"plot '{csv_path}' using 1:{col} with linespoints title '{ylabel}', \\",
        f"     '' using 1:{lo} with lines dashtype 2 title '95% lo', \\",
        f"     '' using 1:{hi} with lines dashtype 2 title '95% hi'",
        "pause -1",
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _validate_fading_csv(args) -> str:
    spec = _fading_spec(args, args.doppler_hz, args.sample_rate_hz)
    spec.validate()
    if args.samples < 100_000:
        raise ValueError("--samples must be at least 100000")
    rng = RngStream(args.seed, pack_stream_id(VALIDATE_EXPERIMENT_ID, 0, 0))
    proc = fading_init(spec, rng)
    stats = validate_process(proc, args.samples)
    lines = [
        "# experiment=validate_fading",
        f"# fading_model={spec.model.value}",
        f"# k_factor={format(spec.k_factor, '.10g')}",
        f"# max_doppler_hz={format(spec.max_doppler_hz, '.10g')}",
        f"# los_doppler_hz={format(spec.los_doppler_hz, '.10g')}",
        f"# los_phase_rad={format(spec.los_phase_rad, '.10g')}",
        f"# sample_rate_hz={format(spec.sample_rate_hz, '.10g')}",
        f"# num_sinusoids={spec.num_sinusoids}",
        f"# samples={args.samples}",
        f"# master_seed={args.seed}",
        f"# ks_statistic={format(stats.ks_statistic, '.6g')}",
        f"# empirical_mean_power={format(stats.empirical_mean_power, '.6g')}",
        "lag_s,autocorr_empirical,autocorr_theoretical",
    ]
    for lag_s, emp, theo in stats.autocorr_lags:
        lines.append(f"{format(lag_s, '.6g')},{format(emp, '.6g')},{format(theo, '.6g')}")
    return "\n".join(lines) + "\n"


def _write_validate_plot(path: str, csv_path: str) -> None:
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set xlabel 'lag (s)'",
        "set ylabel 'real-part autocorrelation'",
        "set grid",
        f"plot '{csv_path}' using 1:2 with points title 'empirical', \\",
        f"     '' using 1:3 with lines title 'theory'",
        "pause -1",
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        if args.command == "validate-fading":
            text = _validate_fading_csv(args)
        else:
            config = _build_config(args)
            config.validate()
            if args.workers < 1:
                raise ValueError("--workers must be at least 1")
    except ValueError as exc:
        print(f"mimolink: invalid configuration: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command != "validate-fading":
            result = run_experiment(config, workers=args.workers)
            text = emit_csv(result, config)
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        if args.plot_script:
            if args.command == "validate-fading":
                _write_validate_plot(args.plot_script, args.out)
            else:
                _write_plot_script(args.plot_script, args.out, args.command)
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit 2
        print(f"mimolink: runtime failure: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
