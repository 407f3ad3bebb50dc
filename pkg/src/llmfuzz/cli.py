"""Command-line front door: fuzz, cmin, sweep, ablate, report.

A thin synchronous shell over the library.  Every flag has a config-file
equivalent (JSON object keyed by flag name); explicit command-line values
override file values.  Exit codes: 0 success, 1 runtime failure, 2
usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .campaign import (
    SWEEP_TEMPERATURES,
    Baseline,
    CampaignConfig,
    ProviderKind,
    VirtualClock,
    resolve_target,
    run_ablation,
    run_campaign,
    run_sweep,
)
from .corpus import atomic_write, read_corpus_dir
from .coverage import CminEntry, cmin_select
from .errors import DictionaryParseError, LlmFuzzError, UnknownTarget
from .harness import Verdict
from .metrics import CampaignRow, SweepReport, emit_csv, rank_table, read_sweep_csv
from .providers import ChatRequestConfig, Endpoint, HttpProvider, MockProvider


class _ConfigError(Exception):
    """Bad flag/config value discovered after argument parsing."""


# ---------------------------------------------------------------------------
# option table: one row per flag, shared by the parser and the config loader
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Opt:
    flags: tuple[str, ...]
    dest: str
    type: Optional[Callable]
    default: object
    help: str
    choices: Optional[tuple[str, ...]] = None
    required: bool = False
    is_flag: bool = False


_BASELINES = tuple(b.value for b in Baseline)
_PROVIDERS = tuple(p.value for p in ProviderKind)
_ENDPOINTS = tuple(e.value for e in Endpoint)

_CONFIG_OPT = _Opt(
    ("--config",), "config", str, None,
    "JSON file of flag defaults for this subcommand; explicit flags win",
)

_FUZZ_OPTS = (
    _Opt(("--target",), "target", str, None,
         "bundled target name or cmd:<command> for an external one", required=True),
    _Opt(("--in",), "in_dir", str, None, "initial seed corpus directory", required=True),
    _Opt(("--out",), "out_dir", str, None,
         "campaign output directory (queue/, ai_queue/, crashes/, stats.json)",
         required=True),
    _Opt(("--baseline",), "baseline", str, "chatfuzz",
         "fuzzer configuration to run", choices=_BASELINES),
    _Opt(("--provider",), "provider", str, "mock",
         "generation backend for chat-augmented baselines", choices=_PROVIDERS),
    _Opt(("--duration",), "duration", float, 60.0, "campaign length in seconds"),
    _Opt(("--temperature",), "temperature", float, None,
         "sampling temperature in [0, 2]; default depends on the endpoint"),
    _Opt(("--n",), "n", int, 20, "completion choices requested per call"),
    _Opt(("--max-tokens",), "max_tokens", int, 256, "response length cap per choice"),
    _Opt(("--sync-interval",), "sync_interval", float, 30.0,
         "seconds between queue/ai_queue import scans"),
    _Opt(("--seed",), "seed", int, 0, "campaign rng seed"),
    _Opt(("--dict",), "dict", str, None, "token dictionary file for the byte mutator"),
    _Opt(("--model",), "model", str, None, "model name sent to the provider"),
    _Opt(("--format",), "format", str, None,
         "input format of a cmd: target (bundled targets know their own)"),
    _Opt(("--chat-rate-limit",), "chat_rate_limit", float, None,
         "minimum seconds between chat mutator calls"),
    _Opt(("--provider-timeout",), "provider_timeout", float, 30.0,
         "per-request timeout for the http provider, seconds"),
    _Opt(("--wall-clock",), "wall_clock", None, False,
         "run in real time (mock campaigns default to the virtual clock)",
         is_flag=True),
    _CONFIG_OPT,
)

_CMIN_OPTS = (
    _Opt(("-i", "--in"), "in_dir", str, None, "corpus directory to minimize", required=True),
    _Opt(("-o", "--out"), "out_dir", str, None, "directory for the kept subset", required=True),
    _Opt(("--target",), "target", str, None,
         "target whose coverage defines redundancy", required=True),
    _Opt(("--format",), "format", str, None, "input format of a cmd: target"),
    _CONFIG_OPT,
)

_SWEEP_OPTS = (
    _Opt(("--target",), "target", str, None, "bundled target to sweep", required=True),
    _Opt(("--provider",), "provider", str, "mock",
         "generation backend", choices=_PROVIDERS),
    _Opt(("--step",), "step", float, 0.25, "temperature grid step over [0, 2]"),
    _Opt(("--per-point",), "per_point", float, 60.0,
         "provider time budget per temperature, seconds"),
    _Opt(("--out",), "out_dir", str, ".", "directory for sweep.csv"),
    _Opt(("--seed",), "seed", int, 0, "sweep rng seed"),
    _Opt(("--n",), "n", int, 20, "completion choices requested per call"),
    _Opt(("--max-tokens",), "max_tokens", int, 256, "response length cap per choice"),
    _CONFIG_OPT,
)

_ABLATE_OPTS = (
    _Opt(("--target",), "target", str, None, "bundled target to ablate", required=True),
    _Opt(("--endpoint",), "endpoint", str, "completion",
         "request shape to hold fixed", choices=_ENDPOINTS),
    _Opt(("--provider",), "provider", str, "mock",
         "generation backend", choices=_PROVIDERS),
    _Opt(("--duration",), "duration", float, 60.0,
         "provider time budget per prompt variant, seconds"),
    _Opt(("--seed",), "seed", int, 0, "ablation rng seed"),
    _Opt(("--n",), "n", int, 20, "completion choices requested per call"),
    _Opt(("--max-tokens",), "max_tokens", int, 256, "response length cap per choice"),
    _CONFIG_OPT,
)

_REPORT_OPTS = (
    _Opt(("--out",), "out_dir", str, None,
         "directory holding campaign stats and sweep.csv", required=True),
    _CONFIG_OPT,
)

_COMMAND_OPTS: dict[str, tuple[_Opt, ...]] = {
    "fuzz": _FUZZ_OPTS,
    "cmin": _CMIN_OPTS,
    "sweep": _SWEEP_OPTS,
    "ablate": _ABLATE_OPTS,
    "report": _REPORT_OPTS,
}


def _add_options(parser: argparse.ArgumentParser, opts: Sequence[_Opt]) -> None:
    for opt in opts:
        if opt.is_flag:
            parser.add_argument(*opt.flags, dest=opt.dest, action="store_const",
                                const=True, default=None, help=opt.help)
        else:
            parser.add_argument(*opt.flags, dest=opt.dest, type=opt.type, default=None,
                                choices=opt.choices, help=opt.help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llmfuzz",
        description="Coverage-guided fuzzing with a generative chat mutator.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    descriptions = {
        "fuzz": "run one fuzzing campaign",
        "cmin": "minimize a corpus, preserving its edge coverage",
        "sweep": "temperature sweep of the chat mutator, emitting sweep.csv",
        "ablate": "compare prompt variants at a fixed endpoint",
        "report": "summarize campaign outputs into campaign.csv (and ranks.csv)",
    }
    for name, opts in _COMMAND_OPTS.items():
        p = sub.add_parser(name, help=descriptions[name], description=descriptions[name])
        _add_options(p, opts)
    return parser


# ---------------------------------------------------------------------------
# config-file merge
# ---------------------------------------------------------------------------


def _load_config_file(path: str) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _ConfigError(f"cannot read config file: {err}") from err
    try:
        data = json.loads(raw)
    except ValueError as err:
        raise _ConfigError(f"config file is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise _ConfigError("config file must hold a JSON object of flag values")
    return data


def _merge_options(args: argparse.Namespace, opts: Sequence[_Opt]) -> dict:
    """Resolve each option: CLI value, else config-file value, else default.

    Config keys may use either the flag spelling ("max-tokens", "in")
    or the attribute spelling ("max_tokens", "in_dir").
    """
    file_values = _load_config_file(args.config) if args.config else {}
    alias_to_dest: dict[str, str] = {}
    for opt in opts:
        if opt.dest == "config":
            continue
        names = {opt.dest, opt.dest.replace("_", "-")}
        for flag in opt.flags:
            stripped = flag.lstrip("-")
            names.add(stripped)
            names.add(stripped.replace("-", "_"))
        for name in names:
            alias_to_dest[name] = opt.dest
    file_by_dest: dict[str, object] = {}
    for key, raw in file_values.items():
        dest = alias_to_dest.get(key)
        if dest is None:
            raise _ConfigError(f"unknown config key {key!r}")
        if dest in file_by_dest:
            raise _ConfigError(f"config key {key!r} repeats an earlier key for the same flag")
        file_by_dest[dest] = raw

    resolved: dict = {}
    for opt in opts:
        if opt.dest == "config":
            continue
        value = getattr(args, opt.dest)
        if value is None:
            value = file_by_dest.get(opt.dest)
            if value is not None and opt.type is not None and not opt.is_flag:
                try:
                    value = opt.type(value)
                except (TypeError, ValueError) as err:
                    raise _ConfigError(
                        f"bad config value for {opt.dest!r}: {err}"
                    ) from err
            if value is not None and opt.choices is not None and value not in opt.choices:
                raise _ConfigError(
                    f"bad config value for {opt.dest!r}: expected one of {opt.choices}"
                )
        if value is None:
            value = opt.default
        if value is None and opt.required:
            raise _ConfigError(
                f"missing required flag --{opt.flags[-1].lstrip('-')} "
                f"(no config-file value either)"
            )
        resolved[opt.dest] = value
    return resolved


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_fuzz(values: dict) -> int:
    request_cfg = ChatRequestConfig(
        max_tokens=values["max_tokens"], n=values["n"], temperature=values["temperature"]
    )
    config = CampaignConfig(
        target=values["target"],
        duration_s=values["duration"],
        rng_seed=values["seed"],
        baseline=Baseline(values["baseline"]),
        provider=ProviderKind(values["provider"]),
        request_cfg=request_cfg,
        sync_interval_s=values["sync_interval"],
        initial_corpus=Path(values["in_dir"]),
        out_dir=Path(values["out_dir"]),
        chat_rate_limit_s=values["chat_rate_limit"],
        dictionary=Path(values["dict"]) if values["dict"] else None,
        model_name=values["model"],
        provider_timeout_s=values["provider_timeout"],
        format_name=values["format"],
    )
    resolve_target(config.target, config.format_name)  # fail fast on bad names
    use_virtual = config.provider is ProviderKind.MOCK and not values["wall_clock"]
    clock = VirtualClock() if use_virtual else None

    report = run_campaign(config, clock=clock)
    ratio = report.import_ratio
    print(
        f"{report.target} {report.baseline.value}: edges={report.edges} "
        f"queue={report.queue_len} imported_ai={report.imported_from_ai} "
        f"import_ratio={'n/a' if ratio is None else f'{ratio:.4f}'} "
        f"crashes={report.crashes} chat_calls={report.chat_calls} "
        f"degraded={str(report.degraded).lower()}"
    )
    print(f"report digest: {report.digest()}")
    return 0


def _cmd_cmin(values: dict) -> int:
    harness = resolve_target(values["target"], values["format"])
    in_dir = Path(values["in_dir"])
    if not in_dir.is_dir():
        raise _ConfigError(f"input corpus directory not found: {in_dir}")
    corpus = read_corpus_dir(in_dir)
    if not corpus:
        raise _ConfigError(f"input corpus directory is empty: {in_dir}")

    entries = []
    for name, data in corpus:
        result = harness.run(data)
        entries.append(
            CminEntry(seed_id=name, trace=result.trace,
                      keep_always=result.verdict is Verdict.CRASH)
        )
    kept = cmin_select(entries)
    kept_ids = {entry.seed_id for entry in kept}

    out_dir = Path(values["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in corpus:
        if name in kept_ids:
            atomic_write(out_dir / name, data)
    print(f"kept {len(kept)} of {len(corpus)} seeds -> {out_dir}")
    return 0


def _sweep_grid(step: float) -> tuple[float, ...]:
    if not 0.0 < step <= 2.0:
        raise _ConfigError(f"--step must be in (0, 2], got {step}")
    n_points = int(round(2.0 / step)) + 1
    temps = tuple(round(i * step, 6) for i in range(n_points) if i * step <= 2.0 + 1e-9)
    return temps


def _make_cli_provider(kind: str, seed: int, timeout_s: float = 30.0):
    if ProviderKind(kind) is ProviderKind.MOCK:
        return MockProvider(seed=seed)
    return HttpProvider(timeout_s=timeout_s)


def _cmd_sweep(values: dict) -> int:
    request_cfg = ChatRequestConfig(max_tokens=values["max_tokens"], n=values["n"])
    temps = _sweep_grid(values["step"])
    provider = _make_cli_provider(values["provider"], values["seed"])
    report = run_sweep(
        values["target"], temps, values["per_point"], provider,
        request_cfg=request_cfg, rng_seed=values["seed"],
    )

    out_dir = Path(values["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    cells = list(report.cells)
    if csv_path.exists():
        # accumulate across invocations: one block of rows per target
        previous = read_sweep_csv(csv_path)
        cells = [c for c in previous.cells if c.program != values["target"]] + cells
    emit_csv(SweepReport(cells=tuple(cells)), csv_path)

    for cell in report.cells:
        print(
            f"{cell.program} t={cell.temperature:.2f} unique={cell.unique_ratio:.4f} "
            f"valid={cell.valid_ratio:.4f} improvement={cell.cov_improvement:.4f}"
        )
    print(f"wrote {csv_path} ({len(cells)} rows)")
    return 0


def _cmd_ablate(values: dict) -> int:
    endpoint = Endpoint(values["endpoint"])
    request_cfg = ChatRequestConfig(max_tokens=values["max_tokens"], n=values["n"])
    seed = values["seed"]
    provider_factory = lambda: _make_cli_provider(values["provider"], seed)  # noqa: E731
    table = run_ablation(
        values["target"], endpoint, values["duration"], provider_factory,
        request_cfg=request_cfg, rng_seed=seed,
    )
    print(f"{table.target} via {table.endpoint.value}:")
    for row in table.rows:
        print(f"  {row.variant.value:<11} edges={row.edges:<6} vs_ai={row.vs_ai:+.2%}")
    return 0


def _cmd_report(values: dict) -> int:
    out_dir = Path(values["out_dir"])
    if not out_dir.is_dir():
        raise _ConfigError(f"output directory not found: {out_dir}")

    stats_files = sorted(out_dir.glob("stats.json")) + sorted(out_dir.glob("*/stats.json"))
    sweep_path = out_dir / "sweep.csv"
    if not stats_files and not sweep_path.exists():
        raise _ConfigError(f"nothing to report: no stats.json or sweep.csv under {out_dir}")

    emitted = []
    if stats_files:
        rows = []
        for path in stats_files:
            snapshot = json.loads(path.read_text(encoding="utf-8"))
            rows.append(
                CampaignRow(
                    target=snapshot["target"],
                    config=snapshot["baseline"],
                    duration_s=snapshot["duration_s"],
                    edges=snapshot["edges"],
                    queue_len=snapshot["queue_len"],
                    imported_ai=snapshot["imported_from_ai"],
                    import_ratio=snapshot["import_ratio"] or 0.0,
                    valid_ratio_queue=snapshot["valid_ratio_queue"] or 0.0,
                )
            )
        campaign_path = out_dir / "campaign.csv"
        emit_csv(rows, campaign_path)
        emitted.append(f"{campaign_path} ({len(rows)} rows)")

    if sweep_path.exists():
        sweep = read_sweep_csv(sweep_path)
        temps = sorted({cell.temperature for cell in sweep.cells})
        improvements: dict[str, list[float]] = {}
        for cell in sweep.cells:
            improvements.setdefault(cell.program, []).append(cell.cov_improvement)
        if improvements and all(len(v) == len(temps) for v in improvements.values()):
            ranks_path = out_dir / "ranks.csv"
            emit_csv(rank_table(improvements, temps), ranks_path)
            emitted.append(f"{ranks_path}")

    for line in emitted:
        print(f"wrote {line}")
    return 0


_COMMANDS: dict[str, Callable[[dict], int]] = {
    "fuzz": _cmd_fuzz,
    "cmin": _cmd_cmin,
    "sweep": _cmd_sweep,
    "ablate": _cmd_ablate,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        values = _merge_options(args, _COMMAND_OPTS[args.command])
    except _ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    runner = _COMMANDS[args.command]
    try:
        return runner(values)
    except (_ConfigError, UnknownTarget, DictionaryParseError, ValueError) as err:
        # bad names, out-of-range knobs, malformed inputs: usage class
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (LlmFuzzError, OSError) as err:
        print(f"runtime failure: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - boundary: anything else is a runtime failure
        print(f"runtime failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
