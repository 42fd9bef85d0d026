"""Command-line entry point: validate a scenario, run one command, emit reports.

Commands: check-laws, detect-arbitrage, simulate, optimize-design,
optimize-price, segment-report. Exit codes: 0 success, 1 when a law
violation or arbitrage finding was detected (so CI can gate on lawfulness),
2 on any error. All report collections are sorted before emission and
numbers use fixed 9-digit formatting, so identical inputs produce identical
bytes.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AgorasimError, UnknownCommand
from .functors import SegmentReport, check_functor_laws, segment_analysis
from .bundling import check_scalar_laws
from .market import EventLog
from .optimize import DesignResult, PriceResult, optimize_design, optimize_price
from .properties import check_morphism_laws
from .reports import LawReport
from .scenario import Scenario, load_scenario, run_market
from .valuations import ArbitrageFinding, check_metric_axioms, detect_arbitrage

COMMANDS = (
    "check-laws",
    "detect-arbitrage",
    "simulate",
    "optimize-design",
    "optimize-price",
    "segment-report",
)


@dataclass
class RunReport:
    """Everything one command produced, plus a deterministic text rendering."""

    command: str
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    law_reports: dict[str, LawReport] = field(default_factory=dict)
    findings: dict[str, list[ArbitrageFinding]] = field(default_factory=dict)
    event_log: EventLog | None = None
    design_results: dict[str, DesignResult] = field(default_factory=dict)
    price_results: dict[str, PriceResult] = field(default_factory=dict)
    segments: SegmentReport | None = None

    def add_section(self, title: str, lines: list[str]) -> None:
        self.sections.append((title, lines))

    def has_violations(self) -> bool:
        if any(not report.passed() for report in self.law_reports.values()):
            return True
        return any(found for found in self.findings.values())

    def to_text(self) -> str:
        out = [f"# {self.command}"]
        for title, lines in self.sections:
            out.append("")
            out.append(f"== {title} ==")
            out.extend(lines)
        out.append("")
        verdict = "violations found" if self.has_violations() else "ok"
        out.append(f"# result: {verdict}")
        return "\n".join(out) + "\n"


def _trade_stats_lines(log: EventLog) -> list[str]:
    trades = log.trades()
    lines = [f"events: {len(log.events)}", f"trades: {len(trades)}"]
    if trades:
        prices = sorted(t.price for t in trades)
        lines.append(f"price min: {prices[0]:.9f}")
        if len(prices) >= 2:
            q1, q2, q3 = statistics.quantiles(prices, n=4)
            lines.append(f"price q25: {q1:.9f}")
            lines.append(f"price median: {q2:.9f}")
            lines.append(f"price q75: {q3:.9f}")
        else:
            lines.append(f"price median: {prices[0]:.9f}")
        lines.append(f"price max: {prices[-1]:.9f}")
    return lines


def _run_check_laws(scenario: Scenario, report: RunReport) -> None:
    objects = [scenario.objects[name] for name in sorted(scenario.objects)]
    catalog = scenario.catalog()

    morphism_report = check_morphism_laws(catalog, objects)
    report.law_reports["morphisms"] = morphism_report
    report.add_section("morphism laws", morphism_report.render())

    for name in sorted(scenario.metrics):
        samples = scenario.metric_sample_points(name)
        title = f"metric axioms: {name}"
        if len(samples) < 3:
            report.add_section(title, [f"skipped: needs >= 3 sample points, have {len(samples)}"])
            continue
        metric_report = check_metric_axioms(scenario.metrics[name], samples)
        report.law_reports[f"metric:{name}"] = metric_report
        report.add_section(title, metric_report.render())

    for name in sorted(scenario.functors):
        title = f"functor laws: {name}"
        if not objects:
            report.add_section(title, ["skipped: no objects to sample"])
            continue
        functor_report = check_functor_laws(scenario.build_functor(name), catalog, objects)
        report.law_reports[f"functor:{name}"] = functor_report
        report.add_section(title, functor_report.render())

    for name in sorted(scenario.bundling):
        scalar_report = check_scalar_laws(scenario.bundling[name], scenario.bundling_samples())
        report.law_reports[f"bundling:{name}"] = scalar_report
        report.add_section(f"bundling laws: {name}", scalar_report.render())


def _run_detect_arbitrage(scenario: Scenario, report: RunReport) -> None:
    for name in sorted(scenario.metrics):
        points = scenario.metric_sample_points(name)
        title = f"arbitrage scan: {name}"
        if len(points) < 3:
            report.add_section(title, [f"skipped: needs >= 3 points, have {len(points)}"])
            continue
        found = detect_arbitrage(scenario.metrics[name], points)
        report.findings[name] = found
        if found:
            lines = [f.render() for f in found]
        else:
            lines = ["no arbitrage cycles found"]
        report.add_section(title, lines)


def _run_simulate(scenario: Scenario, report: RunReport, seed: int | None) -> None:
    log = run_market(scenario, seed=seed)
    report.event_log = log
    report.add_section("trade statistics", _trade_stats_lines(log))


def _run_optimize_design(scenario: Scenario, report: RunReport) -> None:
    for name in sorted(scenario.design_problems):
        result = optimize_design(scenario.build_design_problem(name))
        report.design_results[name] = result
        applied = " -> ".join(result.applied) if result.applied else "(keep the base design)"
        mode = "exhaustive" if result.exhaustive else "beam"
        report.add_section(f"design problem: {name}", [
            f"objective: {result.objective:.9f}",
            f"applied: {applied}",
            f"design: {result.design!r}",
            f"candidates evaluated: {result.evaluated} ({mode})",
        ])


def _run_optimize_price(scenario: Scenario, report: RunReport) -> None:
    for name in sorted(scenario.price_problems):
        result = optimize_price(scenario.build_price_problem(name))
        report.price_results[name] = result
        lines = [
            f"price: {result.price:.9f}",
            f"quantity: {result.quantity}",
            f"revenue: {result.revenue:.9f}",
        ]
        ratios = result.doubling_ratios()
        if ratios:
            lines.append("revenue(2q)/revenue(q) by price (2 would be linear):")
            for price, quantity, ratio in ratios:
                shown = "n/a (zero revenue)" if ratio is None else f"{ratio:.9f}"
                lines.append(f"  price {price:.9f}, q {quantity} -> {shown}")
        report.add_section(f"price problem: {name}", lines)


def _run_segment_report(scenario: Scenario, report: RunReport) -> None:
    agents = [
        (scenario.agents[name].attributes, scenario.build_functor(scenario.agents[name].functor))
        for name in sorted(scenario.agents)
    ]
    segments = segment_analysis(agents, scenario.objects, scenario.segment_attribute)
    report.segments = segments
    report.add_section("segment analysis", segments.render())


def dispatch(command: str, scenario: Scenario, flags: dict | None = None) -> tuple[RunReport, int]:
    """Run one command against a loaded scenario.

    Returns the report and the process exit code. Raises UnknownCommand for
    commands outside the supported set; scenario-level errors propagate as
    their own exception types.
    """
    flags = flags or {}
    report = RunReport(command=command)
    if command == "check-laws":
        _run_check_laws(scenario, report)
    elif command == "detect-arbitrage":
        _run_detect_arbitrage(scenario, report)
    elif command == "simulate":
        _run_simulate(scenario, report, flags.get("seed"))
    elif command == "optimize-design":
        _run_optimize_design(scenario, report)
    elif command == "optimize-price":
        _run_optimize_price(scenario, report)
    elif command == "segment-report":
        _run_segment_report(scenario, report)
    else:
        raise UnknownCommand(f"unknown command {command!r}")
    return report, (1 if report.has_violations() else 0)


def _apply_overrides(scenario: Scenario, args) -> None:
    from .scenario import MarketConfig

    cfg = scenario.market
    rounds = cfg.rounds if args.rounds is None else args.rounds
    split = cfg.split if args.split is None else args.split
    if not 0.0 <= split <= 1.0:
        raise AgorasimError(f"--split must lie in [0, 1], got {split}")
    if rounds < 0:
        raise AgorasimError("--rounds must be >= 0")
    scenario.market = MarketConfig(rounds=rounds, split=split, strict=cfg.strict,
                                   ownership_property=cfg.ownership_property)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agorasim",
        description="Market simulation and law checking over declarative scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--scenario", required=True, help="path to the scenario YAML file")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--rounds", type=int, default=None, help="override market rounds")
        p.add_argument("--split", type=float, default=None, help="override the surplus split")
        p.add_argument("--out", default=None, help="directory for output files (default: stdout)")
        p.add_argument("--format", choices=("log", "report"), default="report",
                       help="simulate only: emit the event log instead of the report")
    return parser


def _emit(args, report: RunReport) -> None:
    texts: list[tuple[str, str]] = []
    if args.command == "simulate" and report.event_log is not None:
        if args.format == "log":
            texts.append(("events.log", report.event_log.to_text()))
        else:
            texts.append(("report.txt", report.to_text()))
            texts.append(("events.log", report.event_log.to_text()))
    else:
        texts.append(("report.txt", report.to_text()))
    if args.out is None:
        for _, text in texts:
            sys.stdout.write(text)
        return
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for filename, text in texts:
        (out_dir / filename).write_text(text, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.command == "simulate":
            _apply_overrides(scenario, args)
        report, code = dispatch(args.command, scenario, {"seed": args.seed})
    except (OSError, AgorasimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(args, report)
    return code


if __name__ == "__main__":
    sys.exit(main())
