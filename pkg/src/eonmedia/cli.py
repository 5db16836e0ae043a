"""Command-line entry point: ``eonmedia <subcommand> ...``.

Exit codes: 0 success, 1 decode failure (the report is still written),
2 usage, configuration or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import layout as lay
from . import pnm
from .degrade import AgedDiskImage, DamageScenario, age_disk
from .optics import (
    DESIGN_BOTTOM_NITRIDE,
    DESIGN_TOP_NITRIDE,
    DESIGN_TUNGSTEN,
    WAVELENGTH,
    contrast,
    load_index_table,
    optimize_thicknesses,
    design_builder,
    design_stack_pair,
    reflectance,
)
from .readout import MODES, MONOCHROMATIC, ReadoutOptions, read_disk
from .retention import EV, HOUR_S, K_B, T_REF, YEAR_S, TestPlan, kbt_to_joule, required_barrier, test_temperature

EXIT_OK = 0
EXIT_DECODE = 1
EXIT_USAGE = 2

TABLE_STORAGE_YEARS = (1e6, 1e9)
TABLE_TEST_TIMES = (("1 hour", HOUR_S), ("1 week", 7 * 24 * HOUR_S), ("1 year", YEAR_S))
DEFAULT_OUTER_PAYLOAD = "EONMEDIA INDEX"
DEFAULT_SYNTHETIC_DOCUMENTS = 64


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--deterministic", action="store_true", help="CI mode: refuse to run without an explicit --seed")
    p.add_argument("--config", type=Path, help="JSON file whose keys match flag names; flags given explicitly win")


def _add_layout_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--outer-payload", default=DEFAULT_OUTER_PAYLOAD, help="text stored in the outer (index) symbol")
    p.add_argument("--document", action="append", type=Path, default=[], help="inner document file (repeatable)")
    p.add_argument("--text", action="append", default=[], help="inner document given inline (repeatable)")
    p.add_argument(
        "--synthetic",
        type=int,
        default=None,
        help=f"generate N numbered documents when none are given (default {DEFAULT_SYNTHETIC_DOCUMENTS})",
    )
    p.add_argument("--outer-version", type=int, default=lay.DEFAULT_OUTER[0])
    p.add_argument("--outer-ec", default=lay.DEFAULT_OUTER[1], choices=list("LMQH"))
    p.add_argument("--inner-version", type=int, default=lay.DEFAULT_INNER[0])
    p.add_argument("--inner-ec", default=lay.DEFAULT_INNER[1], choices=list("LMQH"))
    p.add_argument("--pitch-um", type=float, default=lay.DEFAULT_PITCH * 1e6, help="mask pixel pitch [um]")


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", type=Path, help="scenario JSON (DamageScenario fields)")
    p.add_argument(
        "--segment",
        nargs=2,
        type=float,
        action="append",
        metavar=("TEMP_K", "HOURS"),
        help="schedule segment, repeatable; replaces the scenario file's schedule",
    )
    p.add_argument("--bit-barrier-kbt", type=float, help="per-pixel barrier in units of k_B*300K")


def _add_read_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default=MONOCHROMATIC)
    p.add_argument("--repair-finders", action="store_true")
    p.add_argument("--alpha-target", type=float, default=1e-6)
    p.add_argument("--erasure-band", type=float, default=0.1, help="erasure half-width relative to threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eonmedia", description="Eon-scale optical storage toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("retention", help="required energy barrier for a storage goal")
    p.add_argument("--storage-years", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True, help="tolerated bit-error fraction")
    p.add_argument("--f0", type=float, default=1e9, help="attempt frequency [Hz]")
    p.add_argument("--temp-k", type=float, default=T_REF, help="storage temperature [K]")
    _common(p)

    p = sub.add_parser("plan-test", help="accelerated-ageing test temperature")
    p.add_argument("--storage-years", type=float, default=1e6)
    p.add_argument("--test-hours", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1e-6)
    p.add_argument("--alpha-t", type=float, default=None, help="error fraction allowed in the test (default --alpha)")
    p.add_argument("--f0", type=float, default=1e9)
    p.add_argument("--temp-k", type=float, default=T_REF)
    p.add_argument("--table", action="store_true", help="print the storage-period x test-time grid")
    _common(p)

    p = sub.add_parser("optimize-stack", help="nitride thicknesses maximising W/bare contrast")
    p.add_argument("--bottom-nm", nargs=2, type=float, default=[100.0, 500.0], metavar=("LO", "HI"))
    p.add_argument("--top-nm", nargs=2, type=float, default=[100.0, 400.0], metavar=("LO", "HI"))
    p.add_argument("--tungsten-nm", type=float, default=DESIGN_TUNGSTEN * 1e9)
    p.add_argument("--wavelength-nm", type=float, default=WAVELENGTH * 1e9)
    p.add_argument("--grid", type=int, default=81)
    p.add_argument("--index-table", type=Path, help="CSV material,wavelength_nm,n_real,n_imag")
    p.add_argument("--output", type=Path, help="write the result as JSON")
    _common(p)

    p = sub.add_parser("master", help="encode documents into a mask (PBM) and manifest (JSON)")
    _add_layout_flags(p)
    p.add_argument("--mask", type=Path, required=True, help="output PBM")
    p.add_argument("--manifest", type=Path, required=True, help="output JSON")
    _common(p)

    p = sub.add_parser("simulate", help="age a mask under a thermal scenario into a PGM image")
    p.add_argument("--mask", type=Path, required=True)
    p.add_argument("--manifest", type=Path, help="manifest supplying the pixel pitch")
    p.add_argument("--pitch-um", type=float, default=lay.DEFAULT_PITCH * 1e6)
    _add_scenario_flags(p)
    p.add_argument("--image", type=Path, required=True, help="output PGM")
    _common(p)

    p = sub.add_parser("read", help="decode an aged image and write a JSON report")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--report", type=Path, required=True)
    _add_read_flags(p)
    _common(p)

    p = sub.add_parser("pipeline", help="master, simulate and read in one go")
    _add_layout_flags(p)
    _add_scenario_flags(p)
    _add_read_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)
    _common(p)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # argparse keeps no public accessor
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


_PATH_DESTS = {"mask", "manifest", "image", "report", "scenario", "out_dir", "index_table", "output"}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install config-file values as subcommand defaults (command-line flags still win)."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config is None or command is None:
        return
    try:
        data = json.loads(known.config.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    sub = _subparser(parser, command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in data.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in actions or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        if dest in _PATH_DESTS and isinstance(value, str):
            value = Path(value)
        elif dest == "document":
            value = [Path(v) for v in value]
        actions[dest].required = False
        defaults[dest] = value
    sub.set_defaults(**defaults)


def _documents(args) -> list[bytes]:
    docs = [path.read_bytes() for path in args.document] + [t.encode("utf-8") for t in args.text]
    if docs and args.synthetic is not None:
        raise UsageError("--synthetic cannot be combined with --document/--text")
    if not docs:
        n = DEFAULT_SYNTHETIC_DOCUMENTS if args.synthetic is None else args.synthetic
        if n < 1:
            raise UsageError("--synthetic must be >= 1")
        docs = [b"EON DOC %04d" % i for i in range(n)]
    return docs


def _scenario(args) -> DamageScenario:
    data = {}
    if args.scenario is not None:
        data = json.loads(args.scenario.read_text(encoding="utf-8"))
    if args.segment:
        data["schedule"] = [[t, h * HOUR_S] for t, h in args.segment]
    data.setdefault("schedule", [])
    if args.bit_barrier_kbt is not None:
        data["bit_barrier"] = kbt_to_joule(args.bit_barrier_kbt, T_REF)
    if args.seed is not None or "seed" not in data:
        data["seed"] = args.seed or 0
    return DamageScenario.from_dict(data)


def _read_options(args) -> ReadoutOptions:
    return ReadoutOptions(
        repair_finders=args.repair_finders,
        mode=args.mode,
        alpha_target=args.alpha_target,
        erasure_band=args.erasure_band,
        seed=args.seed or 0,
    )


def cmd_retention(args) -> int:
    barrier = required_barrier(args.storage_years * YEAR_S, args.alpha, args.f0)
    ev = barrier * K_B * args.temp_k / EV
    print(f"required barrier: {barrier:.1f} kBT ({ev:.2f} eV) at {args.temp_k:g} K")
    return EXIT_OK


def cmd_plan_test(args) -> int:
    alpha_t = args.alpha if args.alpha_t is None else args.alpha_t
    if args.table:
        header = "storage period".ljust(16) + "".join(name.rjust(10) for name, _ in TABLE_TEST_TIMES)
        print(header)
        for years in TABLE_STORAGE_YEARS:
            cells = []
            for _, seconds in TABLE_TEST_TIMES:
                plan = TestPlan(years * YEAR_S, args.temp_k, args.alpha, seconds, alpha_t, args.f0)
                cells.append(f"{test_temperature(plan):8.1f} K")
            print(f"{years:g} years".ljust(16) + "".join(c.rjust(10) for c in cells))
        return EXIT_OK
    plan = TestPlan(args.storage_years * YEAR_S, args.temp_k, args.alpha, args.test_hours * HOUR_S, alpha_t, args.f0)
    print(f"test temperature: {test_temperature(plan):.1f} K")
    return EXIT_OK


def cmd_optimize_stack(args) -> int:
    table = load_index_table(args.index_table)
    wl = args.wavelength_nm / 1e9
    build = design_builder(args.tungsten_nm / 1e9, wl, table)
    bounds = tuple(tuple(v / 1e9 for v in pair) for pair in (args.bottom_nm, args.top_nm))
    (bottom, top), best = optimize_thicknesses(build, bounds, grid=args.grid)
    design = design_stack_pair(DESIGN_BOTTOM_NITRIDE, DESIGN_TOP_NITRIDE, args.tungsten_nm / 1e9, wl, table)
    opt = design_stack_pair(bottom, top, args.tungsten_nm / 1e9, wl, table)
    result = {
        "wavelength_nm": args.wavelength_nm,
        "tungsten_nm": args.tungsten_nm,
        "bottom_nm": bottom * 1e9,
        "top_nm": top * 1e9,
        "contrast": best,
        "reflectance_bare": reflectance(opt.bare),
        "reflectance_metal": reflectance(opt.metal),
        "design_contrast": contrast(design.bare, design.metal),
    }
    print(f"bottom nitride {result['bottom_nm']:.1f} nm, top nitride {result['top_nm']:.1f} nm")
    print(f"contrast {best:.4f} (R bare {result['reflectance_bare']:.4f}, R metal {result['reflectance_metal']:.4f})")
    print(f"design stack contrast {result['design_contrast']:.4f}")
    if args.output:
        args.output.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def _master(args) -> tuple[lay.DiskLayout, lay.MaskBitmap, dict]:
    layout = lay.build_layout(
        args.outer_payload.encode("utf-8"),
        _documents(args),
        args.outer_version,
        args.outer_ec,
        args.inner_version,
        args.inner_ec,
        args.pitch_um * 1e-6,
    )
    mask = lay.render_mask(layout)
    return layout, mask, lay.manifest(layout, mask)


def cmd_master(args) -> int:
    layout, mask, man = _master(args)
    args.mask.write_bytes(mask.to_pbm())
    args.manifest.write_text(lay.manifest_json(man), encoding="utf-8")
    print(f"{layout.dark_module_count} inner symbols, mask {mask.width}x{mask.height} px")
    return EXIT_OK


def cmd_simulate(args) -> int:
    pitch = args.pitch_um * 1e-6
    if args.manifest is not None:
        pitch = float(json.loads(args.manifest.read_text(encoding="utf-8"))["pitch_m"])
    mask = lay.MaskBitmap(pnm.read_pbm(args.mask), pitch)
    scenario = _scenario(args)
    image = age_disk(mask, None, scenario)
    args.image.write_bytes(image.to_pgm())
    print(
        f"flipped {image.flipped_bits} bits, {image.crack_count} cracks, "
        f"{image.perturbed_pixels} perturbed pixels, destroyed={image.destroyed}"
    )
    return EXIT_OK


def _report(image: AgedDiskImage, man: dict, args, path: Path) -> int:
    report = read_disk(image, man, _read_options(args))
    path.write_text(report.to_json(), encoding="utf-8")
    print(
        f"decoded {report.decoded}/{report.total_inner} ({report.decoded_after_repair} after repair), "
        f"alpha {report.alpha_observed:.3g} vs target {report.alpha_target:g}: "
        + ("passed" if report.passed else "FAILED")
    )
    return EXIT_OK if report.passed else EXIT_DECODE


def cmd_read(args) -> int:
    image = AgedDiskImage.from_pgm(args.image.read_bytes())
    man = json.loads(args.manifest.read_text(encoding="utf-8"))
    return _report(image, man, args, args.report)


def cmd_pipeline(args) -> int:
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    scenario = _scenario(args)
    _, mask, man = _master(args)
    (out / "mask.pbm").write_bytes(mask.to_pbm())
    (out / "manifest.json").write_text(lay.manifest_json(man), encoding="utf-8")
    (out / "scenario.json").write_text(scenario.to_json(), encoding="utf-8")
    image = age_disk(mask, None, scenario)
    (out / "aged.pgm").write_bytes(image.to_pgm())
    return _report(image, man, args, out / "report.json")


COMMANDS = {
    "retention": cmd_retention,
    "plan-test": cmd_plan_test,
    "optimize-stack": cmd_optimize_stack,
    "master": cmd_master,
    "simulate": cmd_simulate,
    "read": cmd_read,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except UsageError as exc:
        print(f"eonmedia: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.deterministic and args.seed is None:
            raise UsageError("--deterministic requires an explicit --seed")
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError, KeyError, OverflowError) as exc:
        print(f"eonmedia {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
