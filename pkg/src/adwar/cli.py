"""adwar command line.

Subcommands: detect, filter, stealth-plan, rewrite, proxy, eval, simulate,
gen. Reports are machine-readable JSON (add --pretty for humans) and always
carry timing fields. Exit status: 0 success, 1 validation or verification
failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .activeblock import SignatureError, parse_signatures, scan_and_patch
from .armsrace import ArmsState, IllegalTransitionError, Technique, simulate
from .assets import default_filters_text, default_signatures_text
from .detectors import (
    DetectorConfig,
    EvaluationError,
    evaluate_report,
    run_detection,
)
from .filters import FilterError, match_elements, match_url, parse_filter_list
from .generator import CorpusSpec, generate_corpus
from .perceptual.click import HttpFetcher
from .proxy import ProxyConfig, serve_proxy
from .snapshot import SnapshotError, parse_snapshot, serialize_snapshot
from .stealth import (
    StealthError,
    Host,
    build_interception_manifest,
    plan_overlays,
    verify_stealth,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _emit(doc: dict, out_path: str | None, pretty: bool) -> None:
    text = json.dumps(doc, indent=2 if pretty else None, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load_snapshots(args) -> list[tuple[str, "object"]]:
    paths: list[Path] = []
    for p in args.snapshots:
        path = Path(p)
        if path.is_dir():
            paths.extend(sorted(path.glob("*.json")))
        else:
            paths.append(path)
    out = []
    for path in paths:
        out.append((str(path), parse_snapshot(path.read_bytes())))
    return out


def _detector_config(args) -> DetectorConfig:
    cfg = (
        DetectorConfig.from_file(args.config)
        if getattr(args, "config", None)
        else DetectorConfig.default()
    )
    if getattr(args, "marker_policy", None):
        from dataclasses import replace

        cfg = replace(cfg, marker_policy=args.marker_policy)
    if getattr(args, "resolve_links", False):
        from dataclasses import replace

        cfg = replace(cfg, resolve_links=True)
    return cfg


def cmd_detect(args) -> int:
    cfg = _detector_config(args)
    fetcher = HttpFetcher() if cfg.resolve_links else None
    t0 = time.perf_counter()
    reports = {}
    for name, snap in _load_snapshots(args):
        report = run_detection(snap, cfg, fetcher)
        reports[name] = report.to_dict()
    doc = {
        "command": "detect",
        "reports": reports,
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def cmd_filter(args) -> int:
    text = (
        Path(args.filters).read_text(encoding="utf-8")
        if args.filters
        else default_filters_text()
    )
    flist = parse_filter_list(text, args.filters or "<bundled>")
    t0 = time.perf_counter()
    doc: dict = {
        "command": "filter",
        "rules": len(flist.rules),
        "skipped": [{"line": s.raw, "reason": s.reason} for s in flist.skipped],
    }
    if args.url:
        url_results = []
        for url in args.url:
            blocked, rule = match_url(flist, url)
            url_results.append(
                {"url": url, "blocked": blocked, "rule": rule.raw if rule else None}
            )
        doc["urls"] = url_results
    if args.snapshots:
        snaps = {}
        for name, snap in _load_snapshots(args):
            hidden = match_elements(flist, snap)
            blocked_requests = []
            for req in snap.requests:
                blocked, rule = match_url(flist, req.url)
                if blocked:
                    blocked_requests.append({"url": req.url, "rule": rule.raw})
            snaps[name] = {
                "hidden_nodes": {str(fi): sorted(ids) for fi, ids in hidden.items() if ids},
                "blocked_requests": blocked_requests,
            }
        doc["snapshots"] = snaps
    doc["timings"] = {"total_s": time.perf_counter() - t0}
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def cmd_stealth_plan(args) -> int:
    t0 = time.perf_counter()
    [(name, snap)] = _load_snapshots(args)
    if args.nodes:
        ads = [int(x) for x in args.nodes.split(",")]
    else:
        text = (
            Path(args.filters).read_text(encoding="utf-8")
            if args.filters
            else default_filters_text()
        )
        flist = parse_filter_list(text)
        hidden = match_elements(flist, snap)
        ads = sorted(hidden.get(0, set()))
    stylesheet = (
        Path(args.stylesheet).read_text(encoding="utf-8") if args.stylesheet else ""
    )
    plan, transformed = plan_overlays(snap, ads, stylesheet=stylesheet)
    manifest = build_interception_manifest(args.profile, plan, tier=args.tier)
    if args.debug_drop_entry:
        host_name, _, member = args.debug_drop_entry.partition(".")
        manifest = manifest.without(Host(host_name), member)
    verdict = verify_stealth(transformed, manifest, plan, original=snap)
    doc = {
        "command": "stealth-plan",
        "snapshot": name,
        "ads": ads,
        "plan": plan.to_dict(),
        "manifest": manifest.to_dict(),
        "verify": verdict.to_dict(),
        "timings": {"total_s": time.perf_counter() - t0},
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "plan.json").write_text(
            json.dumps(plan.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        (out / "manifest.json").write_text(
            json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        (out / "stylesheet.css").write_text(
            "\n".join((*plan.rewritten_stylesheet, *plan.overlay_rules)) + "\n",
            encoding="utf-8",
        )
        (out / "transformed_snapshot.json").write_text(
            serialize_snapshot(transformed), encoding="utf-8"
        )
    _emit(doc, args.out, args.pretty)
    return EXIT_OK if verdict.passed else EXIT_FAILURE


def cmd_rewrite(args) -> int:
    t0 = time.perf_counter()
    text = (
        Path(args.signatures).read_text(encoding="utf-8")
        if args.signatures
        else default_signatures_text()
    )
    sigs = parse_signatures(text)
    results = {}
    for p in args.scripts:
        path = Path(p)
        source = path.read_text(encoding="utf-8")
        result = scan_and_patch(source, args.host, sigs, script_id=path.name)
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / path.name).write_text(result.rewritten, encoding="utf-8")
        results[path.name] = result.to_dict()
    doc = {
        "command": "rewrite",
        "host": args.host,
        "results": results,
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def cmd_proxy(args) -> int:
    host, _, port = args.listen.partition(":")
    cfg = ProxyConfig(
        listen_host=host or "127.0.0.1",
        listen_port=int(port or 0),
        signatures_path=args.signatures,
        filters_path=args.filters,
        block_resources=args.block_resources == "on",
        max_script_bytes=args.max_script_bytes,
    )
    service = serve_proxy(cfg)
    bound = service.address
    # flush so launchers reading our stdout through a pipe see the address
    print(json.dumps({"listening": f"{bound[0]}:{bound[1]}"}), flush=True)
    try:
        service.server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.shutdown()
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _detector_config(args)
    t0 = time.perf_counter()
    total = {}
    for standard in ("adchoices", "feed-style"):
        total[standard] = None
    for name, snap in _load_snapshots(args):
        report = run_detection(snap, cfg)
        for standard in ("adchoices", "feed-style"):
            matrix = evaluate_report(report, snap, standard)
            total[standard] = matrix if total[standard] is None else total[standard] + matrix
    doc = {
        "command": "eval",
        "matrices": {
            standard: (matrix.to_dict() if matrix else None)
            for standard, matrix in total.items()
        },
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    events = [Technique(e.strip()) for e in args.events.split(",") if e.strip()]
    trace = simulate(events, start=ArmsState(args.start))
    doc = {
        "command": "simulate",
        "start": args.start,
        "events": [e.value for e in events],
        "trace": [s.value for s in trace],
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    spec = CorpusSpec(
        count=args.count,
        feed_ad_density=args.feed_density,
        sidebar_ad_density=args.sidebar_density,
        adchoices_density=args.adchoices_density,
        noise_amplitude=args.noise,
        markup_randomization=args.randomize_markup,
        marker_dropout=args.marker_dropout,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for name, snap in generate_corpus(spec, args.seed):
        (out_dir / name).write_text(serialize_snapshot(snap), encoding="utf-8")
        names.append(name)
    doc = {
        "command": "gen",
        "seed": args.seed,
        "count": len(names),
        "files": names,
        "out_dir": str(out_dir),
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(doc, args.out, args.pretty)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adwar",
        description="perceptual ad detection, stealth planning and "
        "anti-adblock neutralization over page snapshots",
    )
    parser.add_argument("--version", action="version", version=f"adwar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--pretty", action="store_true", help="indent JSON output")

    p = sub.add_parser("detect", help="run the perceptual detectors on snapshots")
    p.add_argument("snapshots", nargs="+", help="snapshot files or directories")
    p.add_argument("--config", help="detector config JSON")
    p.add_argument("--marker-policy", choices=["any", "all"])
    p.add_argument("--resolve-links", action="store_true",
                   help="enable live link resolution (server-visible)")
    add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("filter", help="apply an EasyList-subset filter list")
    p.add_argument("--filters", help="filter list file (default: bundled subset)")
    p.add_argument("--url", action="append", default=[],
                   help="URL to classify (repeatable)")
    p.add_argument("snapshots", nargs="*", help="snapshots for element hiding")
    add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("stealth-plan", help="plan overlays + interception manifest")
    p.add_argument("snapshots", nargs=1, help="snapshot file")
    p.add_argument("--nodes", help="comma-separated ad node ids (top frame)")
    p.add_argument("--filters", help="derive the ad list from element-hiding rules")
    p.add_argument("--stylesheet", help="publisher stylesheet to rewrite")
    p.add_argument("--profile", default="gecko")
    p.add_argument("--tier", default="script-level",
                   choices=["script-level", "source-modification"])
    p.add_argument("--debug-drop-entry", metavar="HOST.MEMBER",
                   help="drop one manifest entry to demonstrate the leak witness")
    p.add_argument("--out-dir", help="write plan.json/manifest.json/stylesheet.css here")
    add_common(p)
    p.set_defaults(func=cmd_stealth_plan)

    p = sub.add_parser("rewrite", help="offline scan-and-patch over script files")
    p.add_argument("scripts", nargs="+", help="script files")
    p.add_argument("--signatures", help="signature JSON (default: bundled set)")
    p.add_argument("--host", default="example.com", help="host the scripts came from")
    p.add_argument("--out-dir", help="write rewritten scripts here")
    add_common(p)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("proxy", help="plain-HTTP rewriting forward proxy")
    p.add_argument("--listen", default="127.0.0.1:8080", metavar="HOST:PORT")
    p.add_argument("--signatures", help="signature JSON file")
    p.add_argument("--filters", help="filter list for --block-resources")
    p.add_argument("--block-resources", choices=["on", "off"], default="off")
    p.add_argument("--max-script-bytes", type=int, default=4 * 1024 * 1024)
    p.set_defaults(func=cmd_proxy)

    p = sub.add_parser("eval", help="confusion matrices over a labeled corpus")
    p.add_argument("snapshots", nargs="+", help="labeled snapshot files/directories")
    p.add_argument("--config", help="detector config JSON")
    p.add_argument("--marker-policy", choices=["any", "all"])
    add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="replay arms-race events")
    p.add_argument("--events", required=True,
                   help="comma-separated technique names, e.g. "
                   "install-or-improve-blocker,deploy-detection,stealth")
    p.add_argument("--start", default="S1", choices=["S1", "S2", "S3", "S4"])
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a labeled synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--feed-density", type=float, default=0.5)
    p.add_argument("--sidebar-density", type=float, default=0.34)
    p.add_argument("--adchoices-density", type=float, default=0.6)
    p.add_argument("--noise", type=int, default=0)
    p.add_argument("--randomize-markup", action="store_true")
    p.add_argument("--marker-dropout", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SnapshotError, FilterError, SignatureError, StealthError,
            EvaluationError, IllegalTransitionError, ValueError) as exc:
        print(f"adwar: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except FileNotFoundError as exc:
        print(f"adwar: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
