"""Command-line front end.

Subcommands ``bound``, ``sweep``, ``chain``, ``verify`` and ``oracle-check``
write CSV or JSON to stdout; warnings go to stderr. Exit codes: 0 success,
1 failed verification, 2 parse error, 3 domain error, 4 numerical error.
"""

import argparse
import io
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import channel_summary, optimize_separable_bound, plob, psi_bound
from .channels import SPEC_KEYS, ChannelKind, make_channel, parse_channel
from .errors import DomainError, NumericalConsistencyError, ParseError
from .fock import DEFAULT_CUTOFFS, convergence_scan
from .repeater import ChainSpec, chain_bound, equidistant_additive_chain
from .simulation import verify_simulation

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4

SWEEP_OUTPUTS = ("psi", "phi", "plob", "psi_opt")


def fmt(x):
    """CSV number: 12 significant digits, locale independent."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def dump_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _warn(message):
    print(f"warning: {message}", file=sys.stderr)


def _executor(jobs):
    return ProcessPoolExecutor(max_workers=jobs) if jobs and jobs > 1 else None


# ---------------------------------------------------------------- bound


def bound_payload(channel):
    result = psi_bound(channel)
    diag = channel_summary(result)
    payload = {
        "channel": channel.spec(),
        "psi_bits": result.psi,
        "phi_bits": result.phi,
    }
    if result.plob is not None:
        payload["plob_bits"] = result.plob
    payload["resource_cm"] = result.resource_cm
    payload["separable_cm"] = result.separable_cm
    payload["diagnostics"] = diag
    return payload


def cmd_bound(args):
    channel = parse_channel(args.channel)
    payload = bound_payload(channel)
    if args.format == "csv":
        header = ["channel", "psi_bits", "phi_bits"] + (["plob_bits"] if "plob_bits" in payload else [])
        return dump_csv(header, [[payload[k] for k in header]]), EXIT_OK
    return dump_json(payload), EXIT_OK


# ---------------------------------------------------------------- sweep


@dataclass(frozen=True)
class SweepConfig:
    template: str
    vary: str
    start: float
    stop: float
    steps: int
    scale: str
    outputs: tuple
    seed: int

    def grid(self):
        if self.steps < 2:
            raise DomainError(f"sweep needs steps >= 2, got {self.steps}")
        if not self.start < self.stop:
            raise DomainError(f"sweep needs start < stop, got {self.start} >= {self.stop}")
        if self.scale == "log":
            if self.start <= 0:
                raise DomainError(f"log-scale sweep needs start > 0, got {self.start}")
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)


def _parse_template(text, vary):
    """Channel template: a channel spec whose ``vary`` key may be omitted."""
    name, sep, body = text.strip().partition(":")
    try:
        kind = ChannelKind(name.strip())
    except ValueError:
        raise ParseError(f"unknown channel kind {name!r}", key=name) from None
    if vary not in SPEC_KEYS[kind]:
        raise ParseError(f"{kind.value}: cannot vary {vary!r} (keys: {', '.join(SPEC_KEYS[kind])})", key=vary)
    fixed = [item for item in body.split(",") if item.strip() and item.partition("=")[0].strip() != vary]
    return kind, fixed


def _channel_at(kind, fixed, vary, value):
    body = ",".join(fixed + [f"{vary}={value!r}"])
    return parse_channel(f"{kind.value}:{body}")


def _sweep_point(task):
    channel, outputs, seed = task
    row = []
    need_bound = any(o in outputs for o in ("psi", "phi", "psi_opt"))
    result = psi_bound(channel) if need_bound else None
    for name in outputs:
        if name == "psi":
            row.append(result.psi)
        elif name == "phi":
            row.append(result.phi)
        elif name == "plob":
            row.append(plob(channel.eta))
        else:
            row.append(optimize_separable_bound(result.resource, seed=seed).psi_opt)
    return row


def run_sweep(config, jobs=1):
    """Rows ``[param, *outputs]`` in grid order; the whole grid is validated first."""
    kind, fixed = _parse_template(config.template, config.vary)
    unknown = [o for o in config.outputs if o not in SWEEP_OUTPUTS]
    if unknown:
        raise ParseError(f"unknown sweep output {unknown[0]!r} (allowed: {', '.join(SWEEP_OUTPUTS)})", key=unknown[0])
    grid = [float(x) for x in config.grid()]
    channels = [_channel_at(kind, fixed, config.vary, x) for x in grid]
    if "plob" in config.outputs:
        for ch in channels:
            if not 0 < ch.eta < 1:
                raise DomainError(f"plob output needs 0 < eta < 1; {ch.spec()} has eta={ch.eta}")
    tasks = [(ch, config.outputs, config.seed) for ch in channels]
    pool = _executor(jobs)
    if pool is None:
        values = list(map(_sweep_point, tasks))
    else:
        with pool:
            values = list(pool.map(_sweep_point, tasks))
    return [[x] + v for x, v in zip(grid, values)]


def cmd_sweep(args):
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    # canonical column order regardless of how --outputs was written
    outputs = tuple(o for o in SWEEP_OUTPUTS if o in outputs) + tuple(o for o in outputs if o not in SWEEP_OUTPUTS)
    config = SweepConfig(
        template=args.channel,
        vary=args.vary,
        start=args.start,
        stop=args.stop,
        steps=args.steps,
        scale=args.scale,
        outputs=outputs,
        seed=args.seed,
    )
    rows = run_sweep(config, jobs=args.jobs)
    header = ["param"] + [f"{o}_bits" for o in config.outputs]
    if args.format == "json":
        payload = {
            "template": config.template,
            "vary": config.vary,
            "scale": config.scale,
            "seed": config.seed,
            "rows": [dict(zip(header, row)) for row in rows],
        }
        return dump_json(payload), EXIT_OK
    return dump_csv(header, rows), EXIT_OK


# ---------------------------------------------------------------- chain


def split_links(text):
    """Split ``kind:k=v,k=v,kind:k=v`` into link specs at tokens containing ``:``."""
    links = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token or not links:
            links.append(token)
        else:
            links[-1] += "," + token
    if not links:
        raise ParseError("empty chain spec", key=None)
    return links


def _parse_equidistant(text):
    _, _, body = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in ("xi", "N"):
            raise ParseError(f"equidistant: unknown or malformed key {key!r} (allowed: xi, N)", key=key)
        if key in params:
            raise ParseError(f"equidistant: duplicate key {key!r}", key=key)
        params[key] = value.strip()
    for key in ("xi", "N"):
        if key not in params:
            raise ParseError(f"equidistant: missing key {key!r}", key=key)
    try:
        xi = float(params["xi"])
    except ValueError:
        raise ParseError(f"equidistant: key 'xi' has non-numeric value {params['xi']!r}", key="xi") from None
    try:
        n = int(params["N"])
    except ValueError:
        raise ParseError(f"equidistant: key 'N' must be an integer, got {params['N']!r}", key="N") from None
    return xi, n


def cmd_chain(args):
    text = args.chain.strip()
    if text.partition(":")[0].strip() == "equidistant":
        xi, n = _parse_equidistant(text)
        if n < 0:
            raise DomainError(f"equidistant: N must be >= 0, got {n}")
        table = [equidistant_additive_chain(xi, k) for k in range(n + 1)]
        final = table[-1]
        link = make_channel(ChannelKind.ADDITIVE_NOISE, xi=final.xi_link)
        if args.format == "csv":
            header = ["N", "xi_link", "psi_chain_bits", "phi_chain_bits"]
            return dump_csv(header, [[e.n_repeaters, e.xi_link, e.psi_chain, e.phi_chain] for e in table]), EXIT_OK
        payload = {
            "links": [link.spec()] * (n + 1),
            "per_link_psi_bits": [final.psi_chain] * (n + 1),
            "psi_chain_bits": final.psi_chain,
            "argmin_link": 0,
            "phi_chain_bits": final.phi_chain,
            "xi_total": xi,
            "n_repeaters": n,
            "n_sweep": [
                {"N": e.n_repeaters, "xi_link": e.xi_link, "psi_chain_bits": e.psi_chain, "phi_chain_bits": e.phi_chain}
                for e in table
            ],
        }
        return dump_json(payload), EXIT_OK

    chain = ChainSpec(tuple(parse_channel(s) for s in split_links(text)))
    pool = _executor(args.jobs)
    if pool is None:
        result = chain_bound(chain)
    else:
        with pool:
            result = chain_bound(chain, executor=pool)
    if args.format == "csv":
        rows = [
            [i, link.spec(), psi, phi]
            for i, (link, psi, phi) in enumerate(zip(chain.links, result.per_link_psi, result.per_link_phi))
        ]
        return dump_csv(["link", "channel", "psi_bits", "phi_bits"], rows), EXIT_OK
    payload = {
        "links": [link.spec() for link in chain.links],
        "per_link_psi_bits": list(result.per_link_psi),
        "psi_chain_bits": result.psi_chain,
        "argmin_link": result.argmin_link,
        "phi_chain_bits": result.phi_chain,
    }
    return dump_json(payload), EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args):
    channel = parse_channel(args.channel)
    if args.samples < 1:
        raise DomainError(f"--samples must be >= 1, got {args.samples}")
    report = verify_simulation(channel, n_samples=args.samples, tol=args.tol, seed=args.seed)
    for note in report.notes:
        _warn(note)
    code = EXIT_OK if report.passed else EXIT_VERIFY_FAILED
    data = report.to_dict()
    if args.format == "csv":
        header = ["channel", "pass", "max_moment_error", "tol", "n_samples", "seed"]
        return dump_csv(header, [[data[k] for k in header]]), code
    return dump_json(data), code


# ---------------------------------------------------------------- oracle-check


def _parse_cutoffs(text):
    try:
        cutoffs = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ParseError(f"--cutoffs must be comma-separated integers, got {text!r}", key="cutoffs") from None
    if not cutoffs:
        raise ParseError("--cutoffs is empty", key="cutoffs")
    if any(c < 1 for c in cutoffs):
        raise DomainError(f"cutoffs must be positive, got {cutoffs}")
    return cutoffs


def cmd_oracle_check(args):
    channel = parse_channel(args.channel)
    cutoffs = _parse_cutoffs(args.cutoffs) if args.cutoffs else DEFAULT_CUTOFFS
    scan = convergence_scan(channel, cutoffs)
    for message in scan.warnings:
        _warn(message)
    if args.format == "json":
        return dump_json(scan.to_dict()), EXIT_OK
    rows = [[row.cutoff, row.oracle_bits, row.delta_vs_formula_bits] for row in scan.rows]
    return dump_csv(["cutoff", "oracle_bits", "delta_vs_formula_bits"], rows), EXIT_OK


# ---------------------------------------------------------------- parser


COMMANDS = {
    "bound": (cmd_bound, "json"),
    "sweep": (cmd_sweep, "csv"),
    "chain": (cmd_chain, "json"),
    "verify": (cmd_verify, "json"),
    "oracle-check": (cmd_oracle_check, "csv"),
}


def _common_flags(parser, default):
    parser.add_argument("--format", choices=("csv", "json"), default=default)
    parser.add_argument("--jobs", type=int, default=default, help="worker processes (default 1)")
    parser.add_argument("--seed", type=int, default=default, help="random seed (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stretchbound",
        description="Secret-key capacity bounds for phase-insensitive Gaussian channels.",
    )
    _common_flags(parser, None)
    # subcommands accept the same flags; SUPPRESS keeps a global value unless overridden
    common = argparse.ArgumentParser(add_help=False)
    _common_flags(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="psi/phi (and plob) at one channel")
    p.add_argument("channel", help="e.g. thermal:eta=0.9,nbar=1")

    p = sub.add_parser("sweep", parents=[common], help="bounds over a one-parameter grid")
    p.add_argument("channel", help="template, e.g. thermal:nbar=1 (the varied key may be omitted)")
    p.add_argument("--vary", required=True, help="parameter to vary (eta, nbar or xi)")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--outputs", default="psi,phi", help="comma-separated subset of psi,phi,plob,psi_opt")

    p = sub.add_parser("chain", parents=[common], help="end-to-end bound for a repeater chain")
    p.add_argument("chain", help="comma-separated links, or equidistant:xi=...,N=...")

    p = sub.add_parser("verify", parents=[common], help="check the teleportation simulation")
    p.add_argument("channel")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("oracle-check", parents=[common], help="Fock-space oracle convergence table")
    p.add_argument("channel")
    p.add_argument("--cutoffs", default=None, help="comma-separated cutoffs (default 15,25,35)")
    return parser


def main(argv=None, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    handler, default_format = COMMANDS[args.command]
    if args.format is None:
        args.format = default_format
    if args.jobs is None:
        args.jobs = 1
    if args.seed is None:
        args.seed = 0
    try:
        text, code = handler(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalConsistencyError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    stdout.write(text)
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
