"""Command-line front end.

Every command builds a request model from its flags and files and hands it to
the operations layer, in process by default or over HTTP with ``--server``.
Machine output goes to stdout (or ``--out``); prose goes to stderr and is
silenced by ``--quiet``.

Exit codes: 0 success, 1 invalid input, 2 verification mismatch,
64 bad flags, 66 unreadable or unwritable file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import urllib.error
import urllib.request
from pathlib import Path

from pydantic import BaseModel

from . import ops
from .channel import CSIT
from .fme import Builtin
from .region import DIM, BoundFamily
from .schemas import (
    BudgetModel, CapacityRequest, ChannelModel, FmeRequest, FmeResponse, FrontierRequest,
    FrontierResponse, InclusionRequest, InclusionResponse, RegionRequest, RegionResponse,
    SchemeModel, SideInfoModel, SimulateRequest, SimulateResponse, ValidateRequest, ValidateResponse,
)
from .sim import BudgetExceeded

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 66


class UsageError(Exception):
    pass


class FileProblem(Exception):
    pass


class RemoteRejected(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing

def _numbers(kind):
    def parse(text: str):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    return parse


def _weights(text: str):
    rows = [_numbers(float)(part) for part in text.split(";") if part.strip()]
    if not rows or any(len(r) != DIM for r in rows):
        raise argparse.ArgumentTypeError(f"each weight vector needs {DIM} entries")
    return rows


def _add_side_info(p, csit=True):
    if csit:
        p.add_argument("--csit", choices=[c.value for c in CSIT], default=CSIT.CAUSAL.value)
    p.add_argument("--state-at-rx1", action="store_true")
    p.add_argument("--state-at-rx2", action="store_true")


def _add_budget(p, cards_default):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-random", type=int, default=64)
    p.add_argument("--n-refine", type=int, default=100)
    p.add_argument("--cards", type=_numbers(int), default=list(cards_default))
    p.add_argument("--weights", type=_weights, default=None, help="e.g. '1,0,0,0,0;0,1,1,0,0'")
    p.add_argument("--grid", type=int, default=None, help="score every point of the 1/GRID simplex grid")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="bcrmsi", description="Rate regions of broadcast channels with state and side information.")
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--server", default=None, help="base URL of a running service")
    common.add_argument("--out", default=None, help="write the JSON result here instead of stdout")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common])
    p.add_argument("--channel", required=True)
    p.add_argument("--scheme")
    _add_side_info(p)
    p.add_argument("--check-degraded", action="store_true")

    p = sub.add_parser("region", parents=[common])
    p.add_argument("--channel", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--family", required=True, choices=[f.value for f in BoundFamily])
    _add_side_info(p)

    p = sub.add_parser("frontier", parents=[common])
    p.add_argument("--channel", required=True)
    p.add_argument("--family", required=True, choices=[f.value for f in BoundFamily])
    _add_side_info(p)
    _add_budget(p, (2, 2, 2))
    p.add_argument("--csv")

    p = sub.add_parser("capacity", parents=[common])
    p.add_argument("--channel", required=True)
    p.add_argument("--variant", required=True, choices=sorted(ops.CAPACITY_VARIANTS))
    p.add_argument("--assert-degraded", action="store_true")
    p.add_argument("--state-at-rx2", action="store_true")
    _add_budget(p, (2, 2))
    p.add_argument("--csv")

    p = sub.add_parser("inclusion", parents=[common])
    p.add_argument("--channel", required=True)
    _add_side_info(p, csit=False)
    p.add_argument("--family", choices=[f.value for f in BoundFamily], default=BoundFamily.UNIFIED_NO_RMSI.value)
    _add_budget(p, (2, 2, 2))

    p = sub.add_parser("fme", parents=[common])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=[b.value for b in Builtin])
    src.add_argument("--file")
    p.add_argument("--no-identities", action="store_true")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("simulate", parents=[common])
    p.add_argument("--channel", required=True)
    p.add_argument("--scheme", required=True)
    _add_side_info(p)
    p.add_argument("--rates", type=_numbers(float), required=True, help="R0,R1,R2,R3,R4")
    p.add_argument("--ns", type=_numbers(int), required=True, help="blocklengths, e.g. 8,16,32")
    for name in ("r11", "r12", "r21", "r22"):
        p.add_argument(f"--{name}", type=float, default=None)
    for name in ("rp0", "rp1", "rp2"):
        p.add_argument(f"--{name}", type=float, default=0.0)
    p.add_argument("--eps-prime", type=float, default=0.1)
    p.add_argument("--eps1", type=float, default=0.2)
    p.add_argument("--eps2", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["auto", "exhaustive", "ensemble"], default="auto")
    p.add_argument("--rmsi", action="store_true")
    p.add_argument("--csv")
    return top


# --------------------------------------------------------------------- I/O

def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileProblem(f"cannot read {path}: {e.strerror or e}")


def _read_json(path: str) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}")


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise FileProblem(f"cannot write {path}: {e.strerror or e}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------- dispatch

LOCAL = {
    "validate": (ops.validate, ValidateResponse),
    "region": (ops.region, RegionResponse),
    "frontier": (ops.frontier, FrontierResponse),
    "capacity": (ops.capacity, FrontierResponse),
    "inclusion": (ops.inclusion, InclusionResponse),
    "fme": (ops.fme_verify, FmeResponse),
    "simulate": (ops.simulate, SimulateResponse),
}


def _remote(server: str, command: str, req: BaseModel, model: type[BaseModel]) -> BaseModel:
    url = server.rstrip("/") + "/" + command
    data = req.model_dump_json().encode("utf-8")
    http_req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(http_req) as resp:
            return model.model_validate_json(resp.read())
    except urllib.error.HTTPError as e:
        body = e.read().decode("utf-8", "replace")
        raise RemoteRejected(f"{e.code}: {body}")
    except urllib.error.URLError as e:
        raise FileProblem(f"cannot reach {url}: {e.reason}")


def _call(args, req: BaseModel) -> BaseModel:
    fn, model = LOCAL[args.command]
    if args.server:
        return _remote(args.server, args.command, req, model)
    return fn(req)


def _side_info(args) -> SideInfoModel:
    return SideInfoModel(
        csit=getattr(args, "csit", CSIT.CAUSAL.value),
        state_at_rx1=args.state_at_rx1,
        state_at_rx2=args.state_at_rx2,
    )


def _budget(args) -> BudgetModel:
    cards = list(args.cards)
    if len(cards) == 2:
        cards.append(1)
    if len(cards) != 3:
        raise ValueError("--cards takes two or three cardinalities")
    return BudgetModel(
        n_random=args.n_random, n_refine=args.n_refine, seed=args.seed,
        cards=tuple(cards), weights=args.weights, grid=args.grid,
    )


def _frontier_csv(resp: FrontierResponse) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow([f"w{i}" for i in range(DIM)] + ["value"])
    for e in resp.entries:
        out.writerow([repr(v) for v in e.weight] + [repr(e.value)])
    return buf.getvalue()


def _sweep_csv(resp: SimulateResponse) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["n", "trials", "p_e", "ci_low", "ci_high", "covering", "rx1_packing", "rx2_packing"])
    for r in resp.reports:
        c = r.causes
        out.writerow([r.n, r.trials, repr(r.p_e), repr(r.ci_low), repr(r.ci_high),
                      c.covering, c.rx1_packing, c.rx2_packing])
    return buf.getvalue()


# ----------------------------------------------------------------- commands

def cmd_validate(args, say) -> int:
    req = ValidateRequest(
        channel=_read_json(args.channel),
        scheme=_read_json(args.scheme) if args.scheme else None,
        side_info=_side_info(args),
        check_degraded=args.check_degraded,
    )
    resp = _call(args, req)
    _write(args.out, resp.model_dump_json(indent=2) + "\n")
    for p in resp.problems:
        say(f"{p.kind}: {p.detail}")
    if resp.degraded is not None:
        say("receiver 2 is " + ("" if resp.degraded else "not ") + "a degraded version of receiver 1")
    return EXIT_OK if resp.valid else EXIT_INVALID


def cmd_region(args, say) -> int:
    req = RegionRequest(
        channel=ChannelModel.model_validate(_read_json(args.channel)),
        scheme=SchemeModel.model_validate(_read_json(args.scheme)),
        side_info=_side_info(args),
        family=args.family,
    )
    resp = _call(args, req)
    _write(args.out, _dump([r.model_dump() for r in resp.rows]))
    say(f"{len(resp.rows)} inequalities" + (" (region is empty)" if resp.empty else ""))
    return EXIT_OK


def _report_frontier(args, resp: FrontierResponse, say) -> None:
    _write(args.out, resp.model_dump_json(indent=2) + "\n")
    if args.csv:
        _write(args.csv, _frontier_csv(resp))
    for e in resp.entries:
        say(f"w={e.weight} value={e.value:.9f}")


def cmd_frontier(args, say) -> int:
    req = FrontierRequest(
        channel=ChannelModel.model_validate(_read_json(args.channel)),
        side_info=_side_info(args),
        family=args.family,
        budget=_budget(args),
    )
    _report_frontier(args, _call(args, req), say)
    return EXIT_OK


def cmd_capacity(args, say) -> int:
    req = CapacityRequest(
        channel=ChannelModel.model_validate(_read_json(args.channel)),
        variant=args.variant,
        assert_degraded=args.assert_degraded,
        state_at_rx2=args.state_at_rx2,
        budget=_budget(args),
    )
    _report_frontier(args, _call(args, req), say)
    return EXIT_OK


def cmd_inclusion(args, say) -> int:
    req = InclusionRequest(
        channel=ChannelModel.model_validate(_read_json(args.channel)),
        state_at_rx1=args.state_at_rx1,
        state_at_rx2=args.state_at_rx2,
        family=args.family,
        budget=_budget(args),
    )
    resp = _call(args, req)
    _write(args.out, resp.model_dump_json(indent=2) + "\n")
    for row in resp.per_weight:
        say(f"w={row.weight} causal={row.causal:.9f} noncausal={row.noncausal:.9f} {'ok' if row.holds else 'VIOLATED'}")
    say(resp.verdict)
    return EXIT_OK if resp.verdict == "HOLDS" else EXIT_MISMATCH


def cmd_fme(args, say) -> int:
    if args.builtin:
        req = FmeRequest(builtin=args.builtin, identities=not args.no_identities)
    else:
        req = FmeRequest(text=_read_text(args.file), identities=not args.no_identities)
    resp = _call(args, req)
    if args.format == "json":
        _write(args.out, resp.model_dump_json(indent=2) + "\n")
    else:
        _write(args.out, ops.proof_report(resp).to_text() + "\n")
    if resp.verdict in ("EQUAL", "PROJECTED"):
        return EXIT_OK
    for s in resp.side_conditions:
        say(f"side condition left after elimination: {s}")
    return EXIT_MISMATCH


def cmd_simulate(args, say) -> int:
    if len(args.rates) != DIM:
        raise UsageError(f"--rates needs {DIM} comma-separated values")
    req = SimulateRequest(
        channel=ChannelModel.model_validate(_read_json(args.channel)),
        scheme=SchemeModel.model_validate(_read_json(args.scheme)),
        side_info=_side_info(args),
        rates=tuple(args.rates),
        ns=args.ns,
        r11=args.r11, r12=args.r12, r21=args.r21, r22=args.r22,
        rp0=args.rp0, rp1=args.rp1, rp2=args.rp2,
        eps_prime=args.eps_prime, eps1=args.eps1, eps2=args.eps2,
        trials=args.trials, seed=args.seed, mode=args.mode, rmsi=args.rmsi,
    )
    resp = _call(args, req)
    _write(args.out, resp.model_dump_json(indent=2) + "\n")
    if args.csv:
        _write(args.csv, _sweep_csv(resp))
    for r in resp.reports:
        say(f"n={r.n} P_e={r.p_e:.4f} [{r.ci_low:.4f}, {r.ci_high:.4f}]")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate, "region": cmd_region, "frontier": cmd_frontier,
    "capacity": cmd_capacity, "inclusion": cmd_inclusion, "fme": cmd_fme, "simulate": cmd_simulate,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    quiet = args.quiet

    def say(msg: str) -> None:
        if not quiet:
            print(msg, file=sys.stderr)

    try:
        return COMMANDS[args.command](args, say)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileProblem as e:
        print(str(e), file=sys.stderr)
        return EXIT_IO
    except RemoteRejected as e:
        print(f"rejected by server {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, BudgetExceeded) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
