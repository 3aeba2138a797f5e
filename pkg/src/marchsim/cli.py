"""Command-line front end.

Exit codes: 0 success (run: test passed; check: every assert succeeded and
every cover matched), 1 result failure (fault detected, missing coverage,
comparison mismatch), 2 usage or input errors.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import click

from . import __version__
from .bist_sim import (
    BistConfig,
    Scenario,
    SignalTrace,
    default_scenario,
    parse_scenario,
    run,
)
from .controller import STATE_NAMES
from .coverage import collect, render as render_coverage
from .diagnosis import (
    DEFAULT_CLASS_ORDER,
    EXPECTED_CAPABILITY,
    capability_matrix,
    render_capability,
    render_syndromes,
    syndrome_table,
)
from .fault_memory import (
    FaultClass,
    FaultSpec,
    MemoryConfig,
    enumerate_faults,
    parse_fault_spec,
)
from .march_core import (
    MarchSyntaxError,
    UnknownAlgorithmError,
    builtin,
    builtin_names,
    format_march,
    op_count,
    parse_march,
)
from .property_engine import (
    builtin_suite,
    evaluate,
    merge_stats,
    parse_suite,
    render_report,
)
from .vcd import export_vcd, trace_from_vcd

USAGE_ERROR = 2
RESULT_ERROR = 1


def _fail(message: str, code: int = USAGE_ERROR):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _out_dir(out: str | None) -> Path:
    path = Path(out or os.environ.get("MARCHSIM_OUT", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_algorithm(spec: str):
    try:
        return builtin(spec)
    except UnknownAlgorithmError:
        pass
    try:
        return parse_march(spec)
    except MarchSyntaxError as exc:
        _fail(f"{spec!r} is neither a built-in algorithm nor valid notation: {exc}")


def _parse_faults(fault_args: tuple[str, ...]) -> list[FaultSpec]:
    faults = []
    for text in fault_args:
        try:
            faults.append(parse_fault_spec(text.split()))
        except ValueError as exc:
            _fail(str(exc))
    return faults


def _load_scenario(path: str | None) -> tuple[Scenario, list[FaultSpec]]:
    if path is None:
        return default_scenario(), []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        _fail(f"cannot read scenario: {exc}")
    try:
        return parse_scenario(text)
    except ValueError as exc:
        _fail(str(exc))


def _directed_scenarios() -> list[tuple[str, str]]:
    root = resources.files("marchsim") / "scenarios" / "directed"
    return sorted((p.name, p.read_text()) for p in root.iterdir() if p.name.endswith(".scn"))


@click.group()
@click.version_option(version=__version__, prog_name="marchsim")
def main():
    """Memory-BIST verification workbench."""


@main.command("list-algorithms")
@click.option("--notation", is_flag=True, help="Include the March notation per row.")
def cmd_list_algorithms(notation: bool):
    """List the built-in March algorithm registry."""
    for name in builtin_names():
        alg = builtin(name)
        row = f"{name:<14} {op_count(alg):>3}"
        if notation:
            row += f"  {format_march(alg)}"
        click.echo(row)


@main.command("run")
@click.option("--c-size", default=8, show_default=True, help="Address counter width in bits.")
@click.option("--width", default=32, show_default=True, help="Word width in bits.")
@click.option("--scenario", "scenario_path", type=str, default=None, help="Scenario file.")
@click.option("--fault", "fault_args", multiple=True, help='Fault spec, e.g. "saf 3 0 0" (repeatable).')
@click.option("--out", type=str, default=None, help="Output directory (or MARCHSIM_OUT).")
@click.option("--vcd", "want_vcd", is_flag=True, help="Also write a VCD waveform.")
@click.option("--expect-fail", is_flag=True, help="Exit 0 when a fault is detected.")
def cmd_run(c_size, width, scenario_path, fault_args, out, want_vcd, expect_fail):
    """Run one BIST simulation; write trace CSV and verdict."""
    try:
        config = BistConfig(c_size=c_size, word_width=width)
    except ValueError as exc:
        _fail(str(exc))
    scenario, faults = _load_scenario(scenario_path)
    faults += _parse_faults(fault_args)
    try:
        trace, verdict = run(config, faults, scenario)
    except ValueError as exc:
        _fail(str(exc))
    outdir = _out_dir(out)
    (outdir / "trace.csv").write_text(trace.to_csv())
    if want_vcd:
        with open(outdir / "trace.vcd", "w") as fh:
            export_vcd(trace, fh)
    doc = {
        "completed": verdict.completed,
        "any_fail": verdict.any_fail,
        "first_fail_cycle": verdict.first_fail_cycle,
        "first_fail_state": (
            STATE_NAMES[verdict.first_fail_state] if verdict.first_fail_state is not None else None
        ),
        "first_fail_addr": verdict.first_fail_addr,
        "cycles": len(trace),
    }
    (outdir / "verdict.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    click.echo(json.dumps(doc, indent=2, sort_keys=True))
    detected = bool(verdict.any_fail)
    if expect_fail:
        sys.exit(0 if detected else RESULT_ERROR)
    sys.exit(0 if verdict.completed and not detected else RESULT_ERROR)


def _check_one(args):
    name, text, c_size, width = args
    config = BistConfig(c_size=c_size, word_width=width)
    scenario, faults = parse_scenario(text)
    trace, _ = run(config, faults, scenario)
    suite = builtin_suite(pause_delay=1 << c_size)
    stats, _ = evaluate(trace, suite)
    return name, stats, trace.to_csv()


@main.command("check")
@click.option("--c-size", default=8, show_default=True)
@click.option("--width", default=32, show_default=True)
@click.option("--scenario-dir", type=str, default=None, help="Directory of .scn files (default: bundled directed set).")
@click.option("--suite", "suite_path", type=str, default=None, help="Suite file (default: built-in 53+53).")
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--keep-traces", is_flag=True, help="Write per-scenario trace CSVs.")
def cmd_check(c_size, width, scenario_dir, suite_path, out, fmt, workers, keep_traces):
    """Run scenarios, evaluate the directive suite, write the report.

    Exits 0 only when every assert has at least one real success and
    every cover at least one match.
    """
    if suite_path is not None:
        try:
            suite = parse_suite(Path(suite_path).read_text())
        except OSError as exc:
            _fail(f"cannot read suite: {exc}")
        except ValueError as exc:
            _fail(str(exc))
    else:
        suite = builtin_suite(pause_delay=1 << c_size)

    if scenario_dir is not None:
        paths = sorted(Path(scenario_dir).glob("*.scn"))
        if not paths:
            _fail(f"no .scn files in {scenario_dir}")
        scenarios = [(p.name, p.read_text()) for p in paths]
    else:
        scenarios = _directed_scenarios()

    try:
        config = BistConfig(c_size=c_size, word_width=width)
    except ValueError as exc:
        _fail(str(exc))

    parts = []
    csvs = {}
    if suite_path is None and workers > 1:
        jobs = [(name, text, c_size, width) for name, text in scenarios]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for name, stats, csv_text in pool.map(_check_one, jobs):
                parts.append(stats)
                csvs[name] = csv_text
    else:
        for name, text in scenarios:
            try:
                scenario, faults = parse_scenario(text)
            except ValueError as exc:
                _fail(f"{name}: {exc}")
            trace, _ = run(config, faults, scenario)
            stats, _ = evaluate(trace, suite)
            parts.append(stats)
            csvs[name] = trace.to_csv()

    merged = merge_stats(parts)
    report = render_report(merged, fmt=fmt)
    outdir = _out_dir(out)
    ext = "json" if fmt == "json" else "txt"
    (outdir / f"assertion_report.{ext}").write_text(report)
    if keep_traces:
        for name, csv_text in csvs.items():
            (outdir / (Path(name).stem + ".csv")).write_text(csv_text)
    click.echo(report, nl=False)

    missing_asserts = sorted(
        s.name for s in merged.values() if s.kind == "assert" and s.real_successes == 0
    )
    missing_covers = sorted(
        s.name for s in merged.values() if s.kind == "cover" and s.matches == 0
    )
    if missing_asserts or missing_covers:
        for name in missing_asserts:
            click.echo(f"UNCOVERED assert {name}", err=True)
        for name in missing_covers:
            click.echo(f"UNCOVERED cover {name}", err=True)
        sys.exit(RESULT_ERROR)
    sys.exit(0)


@main.command("syndromes")
@click.option("--c-size", default=3, show_default=True)
@click.option("--width", default=4, show_default=True)
@click.option("--word", default=0, show_default=True, help="Target word for single-cell faults.")
@click.option("--bit", default=0, show_default=True, help="Target bit for single-cell faults.")
@click.option("--class", "classes", multiple=True,
              type=click.Choice([c.value for c in FaultClass]),
              help="Fault classes to tabulate (default: saf tf).")
@click.option("--drf-limit", default=None, type=int,
              help="Retention limit (default: pause length + 44, pause-only window).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--compare", is_flag=True, help="Diff SAF/TF rows against the expected table.")
@click.option("--workers", default=1, show_default=True)
def cmd_syndromes(c_size, width, word, bit, classes, drf_limit, fmt, compare, workers):
    """Fault syndromes (F1..F6) under the FSM controller."""
    from .fault_memory import BitAddress, DecayMode, Edge, Retention, StuckAt, Transition

    try:
        config = BistConfig(c_size=c_size, word_width=width)
    except ValueError as exc:
        _fail(str(exc))
    cell = BitAddress(word, bit)
    if word >= config.words or bit >= width:
        _fail("target cell out of range")
    wanted = [FaultClass(c) for c in classes] or [FaultClass.SAF, FaultClass.TF]
    if drf_limit is None:
        drf_limit = (1 << c_size) + 44
    faults: list[FaultSpec] = []
    for cls in wanted:
        if cls is FaultClass.SAF:
            faults += [StuckAt(cell, 0), StuckAt(cell, 1)]
        elif cls is FaultClass.TF:
            faults += [Transition(cell, Edge.RISING), Transition(cell, Edge.FALLING)]
        elif cls is FaultClass.DRF:
            faults += [
                Retention(cell, drf_limit, mode)
                for mode in (DecayMode.TO_ZERO, DecayMode.TO_ONE, DecayMode.COMPLEMENT)
            ]
        else:
            other = (word + 1) % config.words
            faults += [
                f
                for f in enumerate_faults(config_mem(config), {cls})
                if _touches(f, word, bit, other)
            ][:6]
    rows = syndrome_table(config, faults, workers=workers)
    click.echo(render_syndromes(rows, fmt=fmt, compare=compare), nl=False)
    if compare:
        bad = [
            r
            for r in rows
            if r.matches_expected is False and _strict_row(r)
        ]
        if bad:
            sys.exit(RESULT_ERROR)
    sys.exit(0)


def config_mem(config: BistConfig) -> MemoryConfig:
    return MemoryConfig(config.words, config.word_width)


def _touches(fault, word, bit, other) -> bool:
    from .fault_memory import AlsoAccesses, Coupling, MapsTo, NoAccess

    if isinstance(fault, NoAccess):
        return fault.addr == word
    if isinstance(fault, (MapsTo, AlsoAccesses)):
        return fault.addr == word and fault.other == other
    if isinstance(fault, Coupling):
        return fault.victim.word == word and fault.victim.bit == bit
    return False


def _strict_row(row) -> bool:
    from .diagnosis import expected_syndrome_key

    return expected_syndrome_key(row.fault) in ("saf0", "saf1", "tf_rising", "tf_falling")


@main.command("capability")
@click.option("--alg", "algs", default="mats+,march_c-,march_b", show_default=True,
              help="Comma-separated algorithm names or inline notation.")
@click.option("--n", "words", default=8, show_default=True, help="Memory words (width is 1).")
@click.option("--class", "classes", multiple=True,
              type=click.Choice([c.value for c in FaultClass]),
              help="Fault classes (default: saf tf af cfin cfid cfst).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--compare", is_flag=True, help="Diff SAF/TF columns against the expected table.")
@click.option("--workers", default=1, show_default=True)
@click.option("--guard", default=64, show_default=True, help="Max cells for enumeration.")
def cmd_capability(algs, words, classes, fmt, compare, workers, guard):
    """Algorithm-vs-fault-class detection matrix (brute force)."""
    alg_list = [_resolve_algorithm(a.strip()) for a in algs.split(",") if a.strip()]
    wanted = [FaultClass(c) for c in classes] or [
        c for c in DEFAULT_CLASS_ORDER if c is not FaultClass.DRF
    ]
    try:
        config = MemoryConfig(words, 1)
        matrix = capability_matrix(
            alg_list, wanted, config, enumeration_guard=guard, workers=workers
        )
    except ValueError as exc:
        _fail(str(exc))
    names = [a.name for a in alg_list]
    click.echo(render_capability(matrix, names, wanted, fmt=fmt), nl=False)
    if compare:
        mismatches = []
        for alg in names:
            expected = EXPECTED_CAPABILITY.get(alg)
            if not expected:
                continue
            for cls in (FaultClass.SAF, FaultClass.TF):
                if cls not in wanted or cls not in expected:
                    continue
                got_all = matrix[(alg, cls)].label == "All"
                want_all = expected[cls] == "A"
                if got_all != want_all:
                    mismatches.append(f"{alg}/{cls.value}")
        if mismatches:
            click.echo("MISMATCH " + " ".join(mismatches), err=True)
            sys.exit(RESULT_ERROR)
    sys.exit(0)


@main.command("coverage")
@click.argument("trace_dir", type=str)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--out", type=str, default=None)
def cmd_coverage(trace_dir, fmt, out):
    """Merge trace files (.csv / .vcd) from a directory into a coverage report."""
    root = Path(trace_dir)
    if not root.is_dir():
        _fail(f"{trace_dir} is not a directory")
    traces: list[SignalTrace] = []
    for path in sorted(root.iterdir()):
        if path.suffix == ".csv":
            text = path.read_text()
            head = text.splitlines()[0].split(",") if text.strip() else []
            if "count" not in head:
                continue
            traces.append(_trace_from_csv(text))
        elif path.suffix == ".vcd":
            with open(path) as fh:
                traces.append(trace_from_vcd(fh))
    if not traces:
        _fail("no readable traces found (need .csv or .vcd files)")
    report = collect(traces)
    text = render_coverage(report, fmt=fmt)
    outdir = _out_dir(out)
    ext = "json" if fmt == "json" else "txt"
    (outdir / f"coverage_report.{ext}").write_text(text)
    click.echo(text, nl=False)
    sys.exit(0)


def _trace_from_csv(text: str) -> SignalTrace:
    import numpy as np

    lines = [ln for ln in text.splitlines() if ln.strip()]
    names = lines[0].split(",")[1:]
    rows = [[int(v) for v in ln.split(",")] for ln in lines[1:]]
    cols = {
        name: np.array([r[i + 1] for r in rows], dtype=np.int64)
        for i, name in enumerate(names)
    }
    c_size = max(1, int(cols["c_max"].max()).bit_length())
    width = max(1, int(cols["signature"].max()).bit_length())
    return SignalTrace(BistConfig(c_size=c_size, word_width=width), cols)


if __name__ == "__main__":
    main()
