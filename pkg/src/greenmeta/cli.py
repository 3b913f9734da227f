"""``greenmeta`` command-line entry point.

Every subcommand prints JSON by default (``--format text`` for a plain
rendering). Exit status is 0 on success, 1 on a domain error (one line on
stderr) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .adaptation import PowerTarget, plan_request, restoration_plan
from .analysis import (EnergyMeasurement, RdCurve, bd_rate, build_profile,
                       read_measurements, relative_savings)
from .dor_req import DorRequest, decode_hex
from .energy import (CodingCandidate, EnergyModel, LagrangeWeights, cost,
                     derdo_select, estimate_energy, fracpel_avoiding_model)
from .errors import GreenMetaError, Unreachable
from .profiles import builtin_names, load_profile
from .session import Scenario


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise GreenMetaError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise GreenMetaError(f"{path}: invalid JSON ({exc})") from None


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from None


def _text_kv(obj, indent=""):
    lines = []
    for key, value in obj.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_text_kv(value, indent + "  "))
        else:
            lines.append(f"{indent}{key}: {value}")
    return lines


# each handler returns (json-able object, text rendering or None)

def cmd_encode_req(args):
    req = DorRequest.from_percent(
        args.ops_pct,
        disable_loop_filters=args.loop_filters_off,
        disable_bi_prediction=args.bi_off,
        disable_intra_in_B=args.intra_in_b_off,
        disable_fracpel_filtering=args.fracpel_off,
        pic_width_in_luma_samples=args.width,
        pic_height_in_luma_samples=args.height,
        frames_per_second=args.fps)
    hexstr = req.to_hex()
    return hexstr, hexstr


def cmd_decode_req(args):
    req = decode_hex(args.hex)
    obj = req.to_json()
    return obj, "\n".join(_text_kv(obj))


def cmd_plan(args):
    profile = load_profile(args.profile)
    plan = plan_request(profile, PowerTarget(args.savings, args.max_bdr))
    obj = plan.to_json()
    bdr = "n/a" if plan.entry.bdr_pct is None else f"{plan.entry.bdr_pct:.2f} %"
    text = (f"action   : {obj['label']}\n"
            f"savings  : {plan.entry.savings_pct:.2f} %\n"
            f"BD-rate  : {bdr}\n"
            f"request  : {obj['request_hex']}"
            + ("\nshortfall: target not reachable with one action"
               if plan.shortfall else ""))
    return obj, text


def cmd_restore_plan(args):
    try:
        seq = restoration_plan(args.factor, args.tolerance, args.max_length)
    except Unreachable as exc:
        raise GreenMetaError(str(exc)) from None
    factor = args.factor
    for c in seq:
        factor *= 1 + c / 100
    obj = {"requests_pct": seq, "final_factor": factor,
           "requests_hex": [DorRequest.from_percent(c).to_hex() for c in seq]}
    text = (" ".join(f"{c:+d}%" for c in seq) or "(none)") + \
        f"  -> factor {factor:.6f}"
    return obj, text


def cmd_simulate(args):
    scenario = Scenario.load(args.scenario)
    result = scenario.run()
    return result.to_json(), result.to_text()


def cmd_derdo_select(args):
    model = EnergyModel.from_json(_read_json(args.model))
    if args.avoid_fracpel:
        model = fracpel_avoiding_model(model)
    raw = _read_json(args.candidates)
    if isinstance(raw, dict):
        raw = raw.get("candidates", [])
    candidates = [CodingCandidate.from_json(c) for c in raw]
    weights = LagrangeWeights(args.lambda_rate, args.lambda_energy)
    best = derdo_select(candidates, weights, model)
    obj = {"selected": best.id,
           "candidates": [{"id": c.id,
                           "energy": estimate_energy(model, c.counts),
                           "cost": cost(c, weights, model)}
                          for c in candidates]}
    rows = [f"{'id':>12} {'energy':>14} {'cost':>14}"]
    for c in obj["candidates"]:
        mark = " *" if c["id"] == best.id else ""
        rows.append(f"{str(c['id']):>12} {c['energy']:14.6g} "
                    f"{c['cost']:14.6g}{mark}")
    return obj, "\n".join(rows)


def cmd_savings(args):
    pct = relative_savings(EnergyMeasurement("reference", args.reference),
                           EnergyMeasurement("test", args.test))
    return {"savings_pct": pct}, f"{pct:.4f} %"


def cmd_bdrate(args):
    ref = RdCurve.from_arrays(args.ref_rate, args.ref_quality)
    test = RdCurve.from_arrays(args.test_rate, args.test_quality)
    value = bd_rate(ref, test)
    return {"bd_rate_pct": value}, ("n/a" if value is None
                                    else f"{value:.4f} %")


def cmd_build_profile(args):
    rows = read_measurements(args.csv)
    profile = build_profile(rows, args.backend, args.content_class,
                            quality_metric=args.quality_metric,
                            source_fps=args.source_fps, decoder=args.decoder)
    obj = profile.to_json()
    lines = [f"{'action':>20} {'savings_%':>10} {'bdr_%':>10}"]
    for e in profile.entries:
        bdr = "n/a" if e.bdr_pct is None else f"{e.bdr_pct:.2f}"
        lines.append(f"{e.label:>20} {e.savings_pct:10.2f} {bdr:>10}")
    return obj, "\n".join(lines)


def cmd_profiles(args):
    names = builtin_names()
    return names, "\n".join(names)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="also write the JSON result to this file")

    parser = argparse.ArgumentParser(
        prog="greenmeta",
        description="Decoder-power reduction requests: codec, planning, "
                    "simulation and analysis.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")

    p = sub.add_parser("encode-req", parents=[common],
                       help="encode a request as 12 hex characters")
    p.add_argument("--ops-pct", type=int, default=0,
                   help="even percentage change in decoder operations [-62, 64]")
    p.add_argument("--loop-filters-off", action="store_true")
    p.add_argument("--bi-off", action="store_true")
    p.add_argument("--intra-in-b-off", action="store_true")
    p.add_argument("--fracpel-off", action="store_true")
    p.add_argument("--width", type=int, default=0, help="0 = no change")
    p.add_argument("--height", type=int, default=0, help="0 = no change")
    p.add_argument("--fps", type=int, default=0, help="0 = no change")
    p.set_defaults(func=cmd_encode_req)

    p = sub.add_parser("decode-req", parents=[common],
                       help="decode a 12-hex-character request")
    p.add_argument("hex")
    p.set_defaults(func=cmd_decode_req)

    p = sub.add_parser("plan", parents=[common],
                       help="choose a request for a savings target")
    p.add_argument("--profile", required=True,
                   help="profile JSON file or built-in name (see 'profiles')")
    p.add_argument("--savings", type=float, required=True,
                   help="required dynamic-energy savings in percent")
    p.add_argument("--max-bdr", type=float, default=None,
                   help="largest acceptable BD-rate in percent")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("restore-plan", parents=[common],
                       help="requests that bring the ops factor back to 1")
    p.add_argument("--factor", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--max-length", type=int, default=4)
    p.set_defaults(func=cmd_restore_plan)

    p = sub.add_parser("simulate", parents=[common],
                       help="replay a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("derdo-select", parents=[common],
                       help="pick the minimum-cost coding candidate")
    p.add_argument("--model", required=True, help="energy model JSON")
    p.add_argument("--candidates", required=True, help="candidate list JSON")
    p.add_argument("--lambda-rate", type=float, default=0.0)
    p.add_argument("--lambda-energy", type=float, default=0.0)
    p.add_argument("--avoid-fracpel", action="store_true",
                   help="penalise fractional-pel filtering, zero other tools")
    p.set_defaults(func=cmd_derdo_select)

    p = sub.add_parser("savings", parents=[common],
                       help="relative energy savings in percent")
    p.add_argument("--reference", type=float, required=True,
                   help="reference energy (J)")
    p.add_argument("--test", type=float, required=True, help="test energy (J)")
    p.set_defaults(func=cmd_savings)

    p = sub.add_parser("bdrate", parents=[common],
                       help="Akima BD-rate between two RD curves")
    p.add_argument("--ref-rate", type=_floats, required=True)
    p.add_argument("--ref-quality", type=_floats, required=True)
    p.add_argument("--test-rate", type=_floats, required=True)
    p.add_argument("--test-quality", type=_floats, required=True)
    p.set_defaults(func=cmd_bdrate)

    p = sub.add_parser("build-profile", parents=[common],
                       help="aggregate measurement CSV into a device profile")
    p.add_argument("--csv", required=True)
    p.add_argument("--backend", choices=("software", "hardware"),
                   required=True)
    p.add_argument("--content-class", required=True)
    p.add_argument("--decoder", default="")
    p.add_argument("--quality-metric", default="PSNR")
    p.add_argument("--source-fps", type=int, default=60)
    p.set_defaults(func=cmd_build_profile)

    p = sub.add_parser("profiles", parents=[common],
                       help="list built-in device profiles")
    p.set_defaults(func=cmd_profiles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        obj, text = args.func(args)
    except GreenMetaError as exc:
        print(f"greenmeta {args.command}: {exc}", file=sys.stderr)
        return 1
    rendered = json.dumps(obj, indent=2)
    if args.out:
        Path(args.out).write_text(rendered + "\n")
    if args.format == "text" and text is not None:
        print(text)
    elif isinstance(obj, str):
        print(obj)
    else:
        print(rendered)
    return 0


if __name__ == "__main__":
    sys.exit(main())
