"""Command-line interface: ``hdrelay capacity|sweep|simulate``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import awgn, bsc
from .channels import ChannelFileError, load_channel, parse_channel
from .coding import CodingConfig, run_simulation
from .halfduplex import RelayPolicy, max_mi_relay_dest
from .infotheory import BA_TOL, DmcChannel, Pmf, channel_capacity
from .solver import CapacityResult, solve_capacity

OUTPUTS = ("capacity", "r_conv", "r_gauss", "p_u_star")
MODELS = ("bsc", "awgn", "dmc")


class UsageError(Exception):
    """Invalid command-line input; reported on one line with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return "" if v is None else str(v)


# --- capacity ----------------------------------------------------------------


def _bsc_result(eps1: float, eps2: float, tol: float) -> CapacityResult:
    pair = bsc.BscPair(eps1, eps2)
    res = bsc.bsc_capacity(pair, tol=min(tol, bsc.ROOT_TOL))
    conv = bsc.bsc_conventional_rate(pair)
    res.extra["r_conv"] = conv
    res.extra["ratio"] = res.capacity / conv if conv > 0 else None
    return res


def _awgn_result(snr1_db: float, snr2_db: float, tol: float, seed: int, k_max: int, gauss: bool = True) -> CapacityResult:
    pair = awgn.AwgnPair.from_snr_db(snr1_db, snr2_db)
    res = awgn.awgn_capacity(pair, k_max=k_max, tol=tol, seed=seed)
    res.extra["r_conv"] = awgn.awgn_conventional_rate(pair)
    if gauss:
        res.extra["r_gauss"] = awgn.gaussian_relay_rate(pair, tol=tol)
    return res


def _dmc_result(sr: DmcChannel, rd: DmcChannel, tol: float) -> CapacityResult:
    return solve_capacity(sr, rd, tol=tol)


def cmd_capacity(args) -> tuple[int, str]:
    if args.model == "bsc":
        res = _bsc_result(args.eps1, args.eps2, args.tol or bsc.ROOT_TOL)
    elif args.model == "awgn":
        res = _awgn_result(*args.snr_db, args.tol or awgn.ROOT_TOL, args.seed, args.k_max)
    else:
        sr, rd = load_channel(args.sr), load_channel(args.rd)
        res = _dmc_result(sr.channel, rd.channel, args.tol or BA_TOL)
        res.extra["relay_symbols"] = list(rd.alphabet.symbols)
    d = res.to_dict()
    if args.json:
        return 0, json.dumps(d, indent=2) + "\n"
    lines = []
    for key, v in d.items():
        if isinstance(v, list):
            v = " ".join(fmt(x) for x in v)
        elif isinstance(v, dict):
            v = json.dumps(v)
        lines.append(f"{key}: {fmt(v)}")
    return 0, "\n".join(lines) + "\n"


# --- sweep -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    model: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]
    tol: float
    seed: int = 0
    k_max: int = awgn.DEFAULT_K_MAX

    def __post_init__(self):
        if self.model not in MODELS:
            raise UsageError(f"unknown model {self.model!r}")
        if not self.grid:
            raise UsageError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise UsageError("sweep grid must be strictly increasing")
        if not self.outputs:
            raise UsageError("no outputs requested")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise UsageError(f"unknown outputs {bad}; choose from {list(OUTPUTS)}")
        if "r_gauss" in self.outputs and self.model != "awgn":
            raise UsageError("r_gauss is defined only for the awgn model")
        if not self.tol > 0:
            raise UsageError("tolerance must be positive")

    @property
    def parameter(self) -> str:
        return "snr_db" if self.model == "awgn" else "eps"


def sweep_row(spec: SweepSpec, x: float) -> dict:
    """One grid point; links are symmetric (both hops share the parameter)."""
    row: dict = {spec.parameter: x}
    try:
        if spec.model == "awgn":
            res = _awgn_result(x, x, spec.tol, spec.seed, spec.k_max, "r_gauss" in spec.outputs)
        elif spec.model == "bsc":
            res = _bsc_result(x, x, spec.tol)
        else:
            # same family as bsc, solved by the generic finite-alphabet solver
            res = _dmc_result(DmcChannel.bsc(x), DmcChannel.bsc(x), spec.tol)
            res.extra["r_conv"] = bsc.bsc_conventional_rate(bsc.BscPair(x, x))
        values = {"capacity": res.capacity, "p_u_star": res.p_u_star, **res.extra}
        row.update({o: values[o] for o in spec.outputs})
        row["error"] = ""
    except Exception as e:  # recorded per row
        row.update({o: None for o in spec.outputs})
        row["error"] = f"{type(e).__name__}: {e}".replace("\n", " ")
    return row


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[dict]:
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        return list(pool.map(lambda x: sweep_row(spec, x), spec.grid))


def rows_to_csv(spec: SweepSpec, rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = [spec.parameter, *spec.outputs, "error"]
    writer.writerow(cols)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in cols])
    return buf.getvalue()


def _grid(args) -> tuple[float, ...]:
    if args.grid is not None:
        return tuple(args.grid)
    start, stop, step = args.range
    if not step > 0:
        raise UsageError("range step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps 0.1 * 3 from printing as 0.30000000000000004
    return tuple(round(start + i * step, 12) for i in range(max(n, 0)))


def cmd_sweep(args) -> tuple[int, str]:
    outputs = tuple(o for o in args.outputs.split(",") if o.strip())
    default_tol = {"bsc": bsc.ROOT_TOL, "awgn": awgn.ROOT_TOL, "dmc": BA_TOL}[args.model]
    spec = SweepSpec(
        model=args.model,
        grid=_grid(args),
        outputs=tuple(o.strip() for o in outputs),
        tol=args.tol or default_tol,
        seed=args.seed,
        k_max=args.k_max,
    )
    rows = run_sweep(spec, args.threads)
    failed = any(r["error"] for r in rows)
    if args.json:
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = rows_to_csv(spec, rows)
    return (1 if failed else 0), text


# --- simulate ----------------------------------------------------------------


def load_sim_config(path: str | Path, seed: int):
    """Parse a simulation config into (config, sr, rd, src_dist, policy, trials).

    Missing ``p_u``, ``p_v`` and ``src_dist`` default to the capacity-achieving
    values; ``rate_fraction`` gives the rate as a fraction of capacity.
    """
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"config {path} is not valid JSON: {e.msg}") from None
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    base = Path(path).parent

    def channel(key):
        v = obj.get(key)
        if v is None:
            raise UsageError(f"config is missing '{key}'")
        return load_channel(base / v) if isinstance(v, str) else parse_channel(v)

    sr, rd = channel("sr").channel, channel("rd").channel
    if "k" not in obj:
        raise UsageError("config is missing 'k'")
    cap = None
    if "p_u" not in obj or "rate_fraction" in obj:
        cap = solve_capacity(sr, rd)
    p_u = float(obj["p_u"]) if "p_u" in obj else cap.p_u_star
    if "rate" in obj:
        rate = float(obj["rate"])
    elif "rate_fraction" in obj:
        rate = float(obj["rate_fraction"]) * cap.capacity
    else:
        raise UsageError("config needs 'rate' or 'rate_fraction'")
    if "p_v" in obj:
        policy = RelayPolicy.from_nonzero(p_u, obj["p_v"])
    else:
        policy = RelayPolicy(p_u, max_mi_relay_dest(p_u, rd)[1])
    src = Pmf(obj["src_dist"]) if "src_dist" in obj else channel_capacity(sr)[1]
    config = CodingConfig(
        k=int(obj["k"]),
        rate=rate,
        p_u=p_u,
        n_blocks=int(obj.get("n_blocks", 8)),
        seed=seed,
        reception_mode=obj.get("reception_mode", "switching"),
    )
    trials = int(obj.get("trials", 100))
    return config, sr, rd, src, policy, trials


def cmd_simulate(args) -> tuple[int, str]:
    config, sr, rd, src, policy, trials = load_sim_config(args.config, args.seed)
    print(f"seed={args.seed}", file=sys.stderr)
    report = run_simulation(config, sr, rd, src, policy, trials)
    out = {"seed": args.seed, "message_bits": config.message_bits, **report.to_json_dict()}
    return 0, json.dumps(out, indent=2) + "\n"


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text/CSV")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--tol", type=float, help="solver tolerance (model default if omitted)")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--threads", type=int, default=1, help="parallel sweep rows")
    common.add_argument("--k-max", type=int, default=awgn.DEFAULT_K_MAX,
                        help="largest AWGN mass-point count")

    p = _Parser(prog="hdrelay", description="Two-hop half-duplex relay capacity tools")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cap = sub.add_parser("capacity", help="capacity of one relay channel")
    models = cap.add_subparsers(dest="model", required=True, parser_class=_Parser)
    b = models.add_parser("bsc", parents=[common], help="binary symmetric links")
    b.add_argument("--eps1", type=float, required=True)
    b.add_argument("--eps2", type=float, required=True)
    a = models.add_parser("awgn", parents=[common], help="Gaussian links, SNRs in dB")
    a.add_argument("--snr-db", type=float, nargs=2, required=True, metavar=("SR", "RD"))
    d = models.add_parser("dmc", parents=[common], help="links from channel JSON files")
    d.add_argument("--sr", required=True)
    d.add_argument("--rd", required=True)

    s = sub.add_parser("sweep", parents=[common], help="tabulate rates over a symmetric grid")
    s.add_argument("--model", choices=MODELS, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid", type=float, nargs="+", help="explicit grid values")
    g.add_argument("--range", type=float, nargs=3, metavar=("START", "STOP", "STEP"))
    s.add_argument("--outputs", default="capacity,r_conv,p_u_star",
                   help=f"comma-separated subset of {','.join(OUTPUTS)}")

    m = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of the coding scheme")
    m.add_argument("config", help="simulation config JSON")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.tol is not None and not args.tol > 0:
            raise UsageError("tolerance must be positive")
        if args.threads < 1:
            raise UsageError("threads must be at least 1")
        if args.k_max < 2:
            raise UsageError("k-max must be at least 2")
        handler = {"capacity": cmd_capacity, "sweep": cmd_sweep, "simulate": cmd_simulate}
        code, text = handler[args.command](args)
    except (UsageError, ChannelFileError, ValueError) as e:
        print(f"error: {e}".replace("\n", " "), file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
