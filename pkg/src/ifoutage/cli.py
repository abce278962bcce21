"""Command-line interface: ``if-outage <command> [options]``.

Every command writes CSV (stdout, or ``--out``).  With ``--out`` a sibling
``<out>.manifest.json`` records the resolved parameters so that
``if-outage replay`` can regenerate a byte-identical file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BOUND_NAMES, evaluate_bound
from .channel import ComplexChannel, SpectrumD, UnitaryMatrix, channel_from_spectrum, realify, spectrum_grid
from .ensembles import RandomStream, sample_cue
from .errors import IFOutageError
from .montecarlo import SimConfig, default_threads, rate_pdf, sample_rates_grid, worst_case_from_rates
from .multicast import MulticastScenario, existence_margin, guaranteed_rate
from .rates import SCHEMES, if_rate, if_sic_rate, joint_ml_rate, mmse_rate

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3
REFERENCE_GAP = 15.24  # space-time NVD benchmark for N_t = 2
# parameters that never change the CSV content
_NON_CONTENT = ("out", "plot", "threads", "func", "command")


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x) + 0.0)
    return str(x)


def _fmt_vec(v) -> str:
    return ";".join(_fmt(float(t)) for t in v)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    return out


def _seed(text: str) -> int:
    try:
        v = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _variants(text: str) -> list[str]:
    return sorted({t.strip() for t in text.split(",") if t.strip()})


def read_channel_csv(path) -> ComplexChannel:
    """Channel file: ``nr,nt`` header, the two sizes, then ``row,col,re,im`` lines.

    Indices are 0-based; entries not listed are zero.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read channel file: {exc}") from None
    try:
        if [c.strip() for c in rows[0]] != ["nr", "nt"]:
            raise ValueError("first line must be 'nr,nt'")
        nr, nt = (int(x) for x in rows[1])
        body = rows[2:]
        if body and body[0][0].strip() == "row":
            body = body[1:]
        m = np.zeros((nr, nt), dtype=complex)
        for r in body:
            i, j = int(r[0]), int(r[1])
            if not (0 <= i < nr and 0 <= j < nt):
                raise ValueError(f"entry ({i},{j}) outside a {nr}x{nt} matrix")
            m[i, j] = float(r[2]) + 1j * float(r[3])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"malformed channel file {path}: {exc}") from None
    return ComplexChannel(m)


def write_channel_csv(h: ComplexChannel, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nr", "nt"])
        w.writerow([h.n_r, h.n_t])
        w.writerow(["row", "col", "re", "im"])
        for i in range(h.n_r):
            for j in range(h.n_t):
                z = h.entries[i, j]
                w.writerow([i, j, _fmt(z.real), _fmt(z.imag)])


# ---------------------------------------------------------------------------
# commands; each returns (header, rows)


def _schemes(values) -> list[str]:
    out = []
    for v in values or ["all"]:
        for s in v.split(","):
            s = s.strip()
            if s == "all":
                out.extend(SCHEMES)
            elif s in SCHEMES:
                out.append(s)
            else:
                raise UsageError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}, all")
    return list(dict.fromkeys(out))


def cmd_rates(a):
    if (a.channel is None) == (a.spectrum is None):
        raise UsageError("give exactly one of --channel or --spectrum")
    if a.channel is not None:
        h = read_channel_csv(a.channel)
    else:
        s = SpectrumD.from_complex(a.spectrum)
        v = sample_cue(s.n_t, RandomStream(a.seed)) if a.cue else UnitaryMatrix(np.eye(s.n_t))
        h = channel_from_spectrum(s, v)
    hr = realify(h)
    exact = not a.heuristic
    fns = {
        "mmse": lambda: mmse_rate(hr),
        "if": lambda: if_rate(hr, exact),
        "if_sic": lambda: if_sic_rate(hr, exact),
        "joint_ml": lambda: joint_ml_rate(h),
    }
    k = hr.dim
    header = ["scheme", "total_rate_bits"] + [f"stream_{i + 1}_bits" for i in range(k)]
    if a.show_matrix:
        header.append("integer_matrix")
    rows = []
    for sc in _schemes(a.scheme):
        rep = fns[sc]()
        per = list(rep.per_stream_bits) + [None] * (k - len(rep.per_stream_bits))
        row = [sc, rep.total_rate_bits] + per
        if a.show_matrix:
            m = rep.integer_matrix
            row.append("" if m is None else "|".join(" ".join(str(int(x)) for x in r) for r in m.entries))
        rows.append(row)
    return header, rows


def _gap_values(a) -> list[float]:
    if a.gap is not None:
        return list(a.gap)
    if a.gap_step <= 0:
        raise UsageError("--gap-step must be positive")
    n = int(math.floor((a.gap_max - a.gap_min) / a.gap_step + 1e-9)) + 1
    if n < 1:
        raise UsageError("--gap-max must be >= --gap-min")
    return [round(a.gap_min + i * a.gap_step, 12) for i in range(n)]


def cmd_bound(a):
    variants = list(a.variants)
    if a.tightened and "tightened" not in variants:
        variants.append("tightened")
    variants.sort()
    grid = spectrum_grid(a.capacity, a.nt, a.grid_res) if a.bound in ("lemma2", "lemma3") else None
    header = ["gap_bits", "bound_value", "bound", "variants", "argmax_dc"]
    rows = []
    for gap in _gap_values(a):
        val, arg = evaluate_bound(a.bound, a.capacity, gap, a.nt, variants, grid)
        rows.append([float(gap), val, a.bound, "+".join(variants), "" if arg is None else _fmt_vec(arg.dc)])
    if a.reference:
        if a.nt != 2:
            raise UsageError("the reference line is defined for --nt 2 only")
        rows.append([REFERENCE_GAP, None, "reference", "", ""])
    return header, rows


def cmd_simulate(a):
    schemes = _schemes(a.scheme)
    grid = spectrum_grid(a.capacity, a.nt, a.grid_res)
    cfg = SimConfig(schemes[0], a.samples, RandomStream(a.seed), not a.heuristic, grid, None, a.threads)
    rates = sample_rates_grid(grid, schemes, cfg)
    gaps = _gap_values(a)
    header = ["gap_bits", "scheme", "p_hat", "ci95", "n_outage", "n_samples", "argmax_dc"]
    rows = []
    for j, sc in enumerate(schemes):
        curve = worst_case_from_rates(a.capacity, gaps, grid, [r[:, j] for r in rates])
        for gap, est, arg in zip(curve.gaps, curve.estimates, curve.argmax):
            rows.append([gap, sc, est.p_hat, est.ci95_halfwidth, est.n_outage, est.n_samples, _fmt_vec(arg.dc)])
    return header, rows


def cmd_multicast(a):
    capacity = a.capacity
    users = a.users
    if a.user_channel:
        sc = MulticastScenario(tuple(read_channel_csv(p) for p in a.user_channel))
        capacity = sc.c_multicast
        users = [sc.k_users]
        if sc.n_t != a.nt:
            raise UsageError(f"user channels have N_t = {sc.n_t} but --nt is {a.nt}")
    if capacity is None:
        raise UsageError("give --capacity or --user-channel")
    header = ["K", "guaranteed_rate_bits", "gap_bits", "margin"]
    rows = []
    for k in users:
        r = guaranteed_rate(capacity, k, a.nt, a.bound, a.variants, a.grid_res)
        margin = existence_margin(capacity, r, k, a.bound, a.variants, a.nt, a.grid_res) if r > 0 else None
        rows.append([k, r, capacity - r, margin])
    return header, rows


def cmd_pdf(a):
    schemes = _schemes(a.scheme)
    cfg = SimConfig(schemes[0], a.samples, RandomStream(a.seed), not a.heuristic, (), None, 1)
    spectrum = SpectrumD.from_complex(a.spectrum) if a.spectrum else None
    if a.ensemble == "fixed_spectrum_cue" and spectrum is None:
        raise UsageError("--ensemble fixed_spectrum_cue needs --spectrum")
    header = ["scheme", "bin_lo_bits", "bin_hi_bits", "mass"]
    rows = []
    for sc in schemes:
        hist = rate_pdf(a.ensemble, sc, cfg, a.capacity, a.nt, spectrum, a.bin_width)
        for lo, hi, m in zip(hist.edges[:-1], hist.edges[1:], hist.mass):
            rows.append([sc, float(lo), float(hi), float(m)])
    return header, rows


COMMANDS = {
    "rates": cmd_rates,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "multicast": cmd_multicast,
    "pdf": cmd_pdf,
}


def _add_common(p, seed=False):
    p.add_argument("--out", help="write CSV here (plus a .manifest.json) instead of stdout")
    p.add_argument("--plot", help="also render a PNG figure to this path")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: $IF_OUTAGE_THREADS or 1)")
    if seed:
        p.add_argument("--seed", type=_seed, default=0, help="decimal 64-bit master seed")


def _add_gaps(p, lo, hi, step):
    p.add_argument("--gap", type=_float_list, help="explicit comma-separated gap values (bits)")
    p.add_argument("--gap-min", type=float, default=lo)
    p.add_argument("--gap-max", type=float, default=hi)
    p.add_argument("--gap-step", type=float, default=step)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="if-outage", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="achievable rates of one channel")
    p.add_argument("--channel", help="channel CSV file")
    p.add_argument("--spectrum", type=_float_list, help="complex diagonal D_c, e.g. 256,1")
    p.add_argument("--cue", action="store_true", help="apply a CUE pre-processing draw (with --spectrum)")
    p.add_argument("--scheme", action="append", help="mmse, if, if_sic, joint_ml or all (repeatable)")
    p.add_argument("--heuristic", action="store_true", help="LLL instead of exact lattice search")
    p.add_argument("--show-matrix", action="store_true", help="add the integer matrix column")
    _add_common(p, seed=True)

    p = sub.add_parser("bound", help="worst-case outage bounds versus gap")
    p.add_argument("--bound", choices=BOUND_NAMES, required=True)
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--capacity", type=float, default=14.0)
    _add_gaps(p, 1.5, 25.0, 0.5)
    p.add_argument("--variants", type=_variants, default=[], help="comma list of primitive, quadruple, tightened")
    p.add_argument("--tightened", action="store_true", help="shorthand for --variants tightened")
    p.add_argument("--grid-res", type=int, default=50)
    p.add_argument("--reference", action="store_true", help="append the 15.24-bit reference row")
    _add_common(p)

    p = sub.add_parser("simulate", help="empirical worst-case outage versus gap")
    p.add_argument("--scheme", action="append", help="mmse, if, if_sic, joint_ml or all (repeatable)")
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--capacity", type=float, default=14.0)
    _add_gaps(p, 0.5, 15.0, 0.5)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--grid-res", type=int, default=20)
    p.add_argument("--heuristic", action="store_true", help="LLL instead of exact lattice search")
    _add_common(p, seed=True)

    p = sub.add_parser("multicast", help="guaranteed multicast rates")
    p.add_argument("--capacity", type=float)
    p.add_argument("--users", type=_int_list, default=[2, 3, 4], help="user counts, e.g. 1-6 or 2,3,4")
    p.add_argument("--user-channel", action="append", help="user channel CSV (repeatable; sets C and K)")
    p.add_argument("--bound", choices=BOUND_NAMES, default="lemma3")
    p.add_argument("--variants", type=_variants, default=["primitive"])
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--grid-res", type=int, default=50)
    _add_common(p)

    p = sub.add_parser("pdf", help="rate histogram")
    p.add_argument("--ensemble", choices=("normalized_rayleigh", "fixed_spectrum_cue"), required=True)
    p.add_argument("--scheme", action="append", help="mmse, if, if_sic, joint_ml or all (repeatable)")
    p.add_argument("--capacity", type=float, default=8.0)
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--spectrum", type=_float_list, help="complex diagonal D_c for fixed_spectrum_cue")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument("--heuristic", action="store_true")
    _add_common(p, seed=True)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest", help="path to a .manifest.json")
    _add_common(p)
    return ap


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def manifest_path(out) -> Path:
    return Path(str(out) + ".manifest.json")


def _content_params(ns) -> dict:
    return {k: v for k, v in sorted(vars(ns).items()) if k not in _NON_CONTENT}


def _run(command, ns, argv_echo):
    t0 = time.perf_counter()
    header, rows = COMMANDS[command](ns)
    text = render_csv(header, rows)
    wall = time.perf_counter() - t0
    if ns.out:
        out = Path(ns.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        params = _content_params(ns)
        man = {
            "command": command,
            "argv": argv_echo,
            "params": params,
            "seed": params.get("seed"),
            "version": __version__,
            "wall_time_s": round(wall, 3),
            "threads": ns.threads,
            "output": out.name,
        }
        manifest_path(out).write_text(json.dumps(man, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)
    if ns.plot:
        from . import plotting

        plotting.render(command, header, rows, ns.plot)


def _replay(ns, parser):
    try:
        man = json.loads(Path(ns.manifest).read_text(encoding="utf-8"))
        command = man["command"]
        params = man["params"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from None
    if command not in COMMANDS:
        raise UsageError(f"manifest names unknown command {command!r}")
    # defaults first, so manifests from older versions still resolve every option
    base = parser.parse_args([command] + _required_stub(command))
    for k, v in params.items():
        setattr(base, k, v)
    base.out = ns.out
    base.plot = ns.plot
    base.threads = ns.threads
    return command, base, man.get("argv", [])


def _required_stub(command):
    return {"bound": ["--bound", "theorem2"], "pdf": ["--ensemble", "normalized_rayleigh"]}.get(command, [])


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.threads is None:
        try:
            ns.threads = default_threads()
        except IFOutageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if ns.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        if ns.command == "replay":
            command, ns, argv = _replay(ns, parser)
        else:
            command = ns.command
        _run(command, ns, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IFOutageError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
