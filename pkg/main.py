#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
latin-ldpc 命令行入口
construct / analyze / simulate / history 四个子命令

用法:
    python main.py construct --family tv --p 5 --mu 3 --m 1 --s 12 --out h1.alist
    python main.py analyze --spec tv:p=5,mu=3,m=1 --girth --expect "girth>=8"
    python main.py simulate --spec tv:p=5,mu=3 --s 8 --frames 100 --seed 1 --out ber.csv
"""

import argparse
import json
import operator
import os
import re
import sys
import time
from typing import Dict, List, Optional

import psutil

import analysis
import artifacts
import blockcodes
import convcodes
import simulate
from config import ANALYSIS_CONFIG, SIMULATION_CONFIG, TOOL
from database import init_database, ReportStore, RunHistory
from gf2sparse import MatrixFormatError
from latin import LatinSquareError
from logger_config import setup_logger, get_logger

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_EXPECT_FAILED = 3

BLOCK_FAMILY = "block"
BLOCK_STAGES = {
    "base": blockcodes.STAGE_BASE,
    "step1": blockcodes.STAGE_STEP1,
    "step2": blockcodes.STAGE_STEP2,
    "step3": blockcodes.STAGE_STEP3,
    "step4": blockcodes.STAGE_STEP4,
    "final": blockcodes.STAGE_STEP4,
}

CSV_FIELDS = ("crossover", "frames", "bit_errors", "frame_errors", "avg_iters")

_EXPECT_PATTERN = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(>=|<=|==|!=|>|<)\s*(-?\d+)\s*$")
_COMPARATORS = {
    ">=": operator.ge, "<=": operator.le, "==": operator.eq,
    "!=": operator.ne, ">": operator.gt, "<": operator.lt,
}

# 域错误：报告给用户而不是抛出
DOMAIN_ERRORS = (
    convcodes.ConstructionError, blockcodes.BlockCodeError, analysis.AnalysisError,
    simulate.ChannelError, MatrixFormatError, LatinSquareError,
)


def result(code: str, message: str, data=None) -> Dict:
    return {'code': code, 'message': message, 'data': data if data is not None else ''}


# ==================== 参数解析 ====================

def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"必须是正整数: {text}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"不能为负: {text}")
    return value


def parse_expectation(text: str):
    """把 "girth>=8" 解析为 (指标, 比较符, 数值)"""
    match = _EXPECT_PATTERN.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"无法解析的断言: {text!r}（格式如 girth>=8）")
    name, op, value = match.groups()
    return name, op, int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL["name"], description="拉丁方 LDPC 卷积码与分组码构造和校验工具")
    parser.add_argument("--version", action="version", version=f"{TOOL['name']} {TOOL['version']}")
    parser.add_argument("--quiet", action="store_true", help="控制台只输出警告和错误")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    construct = sub.add_parser("construct", help="构造校验矩阵并导出 alist")
    construct.add_argument("--family", required=True, choices=convcodes.FAMILIES + (BLOCK_FAMILY,))
    construct.add_argument("--p", type=int)
    construct.add_argument("--mu", type=non_negative_int)
    construct.add_argument("--m", type=non_negative_int, default=0)
    construct.add_argument("--s", type=non_negative_int)
    construct.add_argument("--stage", choices=sorted(BLOCK_STAGES), default="final")
    construct.add_argument("--out")
    construct.set_defaults(func=cmd_construct)

    analyze = sub.add_parser("analyze", help="围长、环计数、密度和距离分析")
    source = analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", help="构造参数，如 tv:p=5,mu=3,m=1")
    source.add_argument("--in", dest="input", help="alist 文件")
    analyze.add_argument("--s", type=non_negative_int, help="窗口长度；省略时围长使用稳定化窗口")
    analyze.add_argument("--first-period", action="store_true", help="只统计与前 T 个块列相交的环")
    analyze.add_argument("--girth", action="store_true")
    analyze.add_argument("--count-cycles", type=int, nargs="+", default=[], metavar="LENGTH")
    analyze.add_argument("--density", action="store_true")
    analyze.add_argument("--distances", action="store_true")
    analyze.add_argument("--jmax", type=non_negative_int, default=None)
    analyze.add_argument("--d-cap", type=positive_int, default=None)
    analyze.add_argument("--weight-cap", type=positive_int, default=2)
    analyze.add_argument("--span-cap", type=positive_int, default=2)
    analyze.add_argument("--expect", type=parse_expectation, action="append", default=[])
    analyze.add_argument("--cache", action="store_true", help="复用数据库中相同请求的报告")
    analyze.add_argument("--out", help="JSON 报告路径")
    analyze.set_defaults(func=cmd_analyze)

    sim = sub.add_parser("simulate", help="BSC 上的 BP 译码 Monte Carlo 仿真")
    source = sim.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec")
    source.add_argument("--in", dest="input")
    sim.add_argument("--s", type=non_negative_int)
    sim.add_argument("--grid", type=float, nargs="+", default=None)
    sim.add_argument("--frames", type=positive_int, default=SIMULATION_CONFIG["frames"])
    sim.add_argument("--seed", type=non_negative_int, default=0)
    sim.add_argument("--max-iters", type=positive_int, default=None)
    sim.add_argument("--workers", type=positive_int, default=SIMULATION_CONFIG["workers"])
    sim.add_argument("--random-codeword", action="store_true")
    sim.add_argument("--out", required=True, help="CSV 输出路径")
    sim.set_defaults(func=cmd_simulate)

    history = sub.add_parser("history", help="列出最近的运行记录")
    history.add_argument("--limit", type=positive_int, default=20)
    history.add_argument("--subcommand", dest="filter_subcommand",
                         choices=["construct", "analyze", "simulate"])
    history.set_defaults(func=cmd_history)
    return parser


def manifest_parameters(args: argparse.Namespace) -> Dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "cache")}
    if params.get("expect"):
        params["expect"] = [f"{n}{op}{v}" for n, op, v in params["expect"]]
    return params


# ==================== construct ====================

def cmd_construct(args) -> Dict:
    """构造矩阵，写出 alist 和 JSON 边车"""
    manifest = artifacts.RunManifest("construct", manifest_parameters(args))
    if args.family == BLOCK_FAMILY:
        if not args.m or args.m < 1:
            return result("error", "❌ 分组码需要 --m ≥ 1")
        stage = BLOCK_STAGES[args.stage]
        built = blockcodes.build_pipeline(args.m, stage)[stage]
        matrix, describe = built.matrix, built.describe()
        out = args.out or f"block_m{args.m}_{args.stage}.alist"
    else:
        if args.p is None or args.mu is None or args.s is None:
            return result("error", "❌ 卷积码需要 --p、--mu 和 --s")
        spec = convcodes.ConstructionSpec(args.family, args.p, args.mu, args.m)
        window = convcodes.materialize(spec, args.s)
        matrix, describe = window.matrix, window.describe()
        out = args.out or f"{args.family}_p{args.p}_mu{args.mu}_m{args.m}_s{args.s}.alist"

    digest = artifacts.write_alist(out, matrix)
    manifest.add_output(out, digest)
    describe.update({"n_rows": matrix.n_rows, "n_cols": matrix.n_cols, "nnz": matrix.nnz()})
    files = artifacts.write_with_sidecar(out, {"matrix": describe}, manifest)
    print(f"📦 {matrix.n_rows}x{matrix.n_cols}, nnz={matrix.nnz()} → {out}")
    return result("success", "✅ 构造完成", {"files": files, "matrix": describe, "manifest": manifest})


# ==================== analyze ====================

def _load_matrix(args):
    """返回 (矩阵, 窗口或 None, 构造参数或 None, 起始区域)"""
    if args.input:
        matrix = artifacts.read_alist(args.input)
        sidecar = artifacts.read_sidecar(args.input) or {}
        info = sidecar.get("matrix", {})
        region = None
        if args.first_period:
            if "T" not in info or "n" not in info:
                raise analysis.AnalysisError("--first-period 需要带 T 和 n 的 JSON 边车")
            blocks = min(info["T"], info.get("s", info["T"] - 1) + 1)
            region = range(0, blocks * info["n"])
        return matrix, None, None, region

    spec = convcodes.ConstructionSpec.parse(args.spec)
    if args.s is None:
        return None, None, spec, None
    window = convcodes.materialize(spec, args.s)
    region = analysis.first_period_region(window) if args.first_period else None
    return window.matrix, window, spec, region


def _validate_analyze(args) -> Optional[str]:
    max_length = ANALYSIS_CONFIG["max_census_length"]
    for length in args.count_cycles:
        if length % 2 or not 4 <= length <= max_length:
            return f"❌ 环长必须是 4..{max_length} 之间的偶数: {length}"
    if args.d_cap is not None and args.d_cap > ANALYSIS_CONFIG["max_d_cap"]:
        return f"❌ d_cap 过大: {args.d_cap} > {ANALYSIS_CONFIG['max_d_cap']}"
    if (args.distances or args.density) and not args.spec:
        return "❌ --distances 和 --density 需要 --spec"
    if args.density and args.s is None:
        return "❌ --density 需要 --s"
    if args.count_cycles and args.spec and args.s is None:
        return "❌ 按构造参数计数环时需要 --s"
    if not (args.girth or args.count_cycles or args.density or args.distances):
        return "❌ 至少选择一项分析：--girth / --count-cycles / --density / --distances"
    return None


def request_key(args) -> str:
    params = manifest_parameters(args)
    params.pop("out", None)
    params.pop("expect", None)
    if args.input:
        params["input"] = artifacts.sha256_file(args.input)
    params["tool_version"] = TOOL["version"]
    return artifacts.sha256_text(json.dumps(params, sort_keys=True))


def build_report(args) -> Dict:
    matrix, window, spec, region = _load_matrix(args)
    report: Dict = {"spec": spec.to_dict() if spec else None, "window_s": args.s}
    if args.input:
        report["input"] = os.path.basename(args.input)

    if args.girth:
        if matrix is None:
            g = analysis.girth_stabilized(spec)
        else:
            g = analysis.girth(matrix, region)
            g.window_s = args.s
            g.girth_bound = convcodes.girth_lower_bound(spec) if spec else None
        report.update(g.to_dict())

    if args.count_cycles:
        cycles = analysis.census(matrix, sorted(set(args.count_cycles)), region, window_s=args.s)
        report["census"] = cycles.to_dict()["counts"]
        report["first_period"] = cycles.restricted_to_first_period

    if args.density:
        report["density"] = analysis.density_check(spec, args.s).to_dict()

    if args.distances:
        d_cap = args.d_cap or ANALYSIS_CONFIG["d_cap"]
        jmax = args.jmax if args.jmax is not None else spec.memory + 1
        profile = analysis.distance_profile(spec, jmax, d_cap, args.weight_cap, args.span_cap)
        report.update(profile.to_dict())
    return report


def report_metrics(report: Dict) -> Dict[str, float]:
    """把报告展开成 --expect 可引用的指标"""
    metrics: Dict[str, float] = {}
    if "girth" in report:
        g = report["girth"]
        metrics["girth"] = g if isinstance(g, int) else float("inf")
    for length, count in report.get("census", {}).items():
        metrics[f"cycles{length}"] = count
    if "density" in report:
        metrics["density_match"] = int(report["density"]["match"])
    for j, d in report.get("distances", {}).items():
        metrics[f"d{j}"] = d if isinstance(d, int) else float("inf")
    if "d_free" in report:
        metrics["d_free_lo"] = report["d_free"]["lo"]
        if report["d_free"]["hi"] is not None:
            metrics["d_free_hi"] = report["d_free"]["hi"]
    return metrics


def check_expectations(expectations, metrics: Dict) -> List[str]:
    failures = []
    for name, op, value in expectations:
        if name not in metrics:
            failures.append(f"{name}{op}{value}: 报告中没有指标 {name}")
        elif not _COMPARATORS[op](metrics[name], value):
            failures.append(f"{name}{op}{value}: 实际为 {metrics[name]}")
    return failures


def print_report(report: Dict):
    if "girth" in report:
        print(f"🔗 girth = {report['girth']}  (window s={report['window_s']}, bound={report['girth_bound']})")
    for length, count in report.get("census", {}).items():
        print(f"🔁 {length}-cycles: {count}")
    if "density" in report:
        d = report["density"]
        print(f"📐 density {d['measured']} vs {d['formula']}: {'match' if d['match'] else 'MISMATCH'}")
    if "distances" in report:
        print("📏 column distances: " + ", ".join(str(v) for _, v in sorted(report["distances"].items(),
                                                                           key=lambda kv: int(kv[0]))))
        free = report["d_free"]
        print(f"📏 d_free ∈ [{free['lo']}, {free['hi']}]{' (gap)' if free['gap'] else ''}")


def cmd_analyze(args) -> Dict:
    problem = _validate_analyze(args)
    if problem:
        return result("error", problem)
    manifest = artifacts.RunManifest("analyze", manifest_parameters(args))
    if args.input:
        manifest.add_input(args.input)

    report = None
    key = request_key(args) if args.cache else None
    if key:
        cached = ReportStore.get_by_key(key)
        if cached:
            logger.info(f"♻️ 使用缓存报告（第 {cached['use_count']} 次命中）")
            report = cached["report"]
    if report is None:
        report = build_report(args)
        if key:
            ReportStore.save(key, args.spec or os.path.basename(args.input), report, TOOL["version"])

    print_report(report)
    files = []
    if args.out:
        digest = artifacts.write_json(args.out, dict(report, manifest=manifest.to_dict()))
        manifest.add_output(args.out, digest)
        files.append(args.out)
    else:
        print(artifacts.canonical_json(report), end="")

    failures = check_expectations(args.expect, report_metrics(report))
    data = {"report": report, "files": files, "manifest": manifest, "expect_failed": failures}
    if failures:
        for failure in failures:
            logger.error(f"❌ 断言失败: {failure}")
        return result("error", "❌ 断言未通过", data)
    return result("success", "✅ 分析完成", data)


# ==================== simulate ====================

def cmd_simulate(args) -> Dict:
    manifest = artifacts.RunManifest("simulate", manifest_parameters(args))
    if args.input:
        source, s = artifacts.read_alist(args.input), None
        manifest.add_input(args.input)
    else:
        if args.s is None:
            return result("error", "❌ 按构造参数仿真需要 --s")
        source, s = convcodes.ConstructionSpec.parse(args.spec), args.s

    points = simulate.monte_carlo(source, s, grid=args.grid, frames=args.frames, seed=args.seed,
                                  max_iters=args.max_iters, workers=args.workers,
                                  random_codeword=args.random_codeword)
    rows = [point.to_row() for point in points]
    digest = artifacts.write_csv(args.out, rows, CSV_FIELDS)
    manifest.add_output(args.out, digest)
    files = artifacts.write_with_sidecar(args.out, {"rows": len(rows)}, manifest)
    for row in rows:
        print(f"📡 ε={row['crossover']}: bit_errors={row['bit_errors']} frame_errors={row['frame_errors']} "
              f"avg_iters={row['avg_iters']}")
    return result("success", "✅ 仿真完成", {"files": files, "rows": rows, "manifest": manifest})


# ==================== history ====================

def cmd_history(args) -> Dict:
    runs = RunHistory.get_recent(args.limit, args.filter_subcommand)
    for run in runs:
        print(f"#{run['id']} {run['started_at']} {run['subcommand']} exit={run['exit_code']} "
              f"{run['duration_ms']}ms {run['manifest_digest'] or ''}")
    stats = ReportStore.get_stats()
    print(f"📊 缓存报告 {stats['total']} 份，累计命中 {stats['total_hits']} 次")
    return result("success", f"✅ 共 {len(runs)} 条记录", {"runs": runs, "cache": stats})


# ==================== 入口 ====================

def exit_code_for(outcome: Dict) -> int:
    if outcome['code'] == 'success':
        return EXIT_OK
    data = outcome.get('data')
    if isinstance(data, dict) and data.get('expect_failed'):
        return EXIT_EXPECT_FAILED
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logger(console_level="WARNING" if args.quiet else None)
    init_database()

    started = time.monotonic()
    try:
        outcome = args.func(args)
    except DOMAIN_ERRORS as e:
        outcome = result("error", f"❌ {e}")

    code = exit_code_for(outcome)
    if code == EXIT_OK:
        logger.info(outcome['message'])
    else:
        logger.error(outcome['message'])
        print(outcome['message'], file=sys.stderr)

    if args.subcommand != "history":
        data = outcome.get('data')
        manifest = data.get('manifest') if isinstance(data, dict) else None
        RunHistory.record(args.subcommand, manifest_parameters(args), code,
                          manifest.digest() if manifest else None,
                          int((time.monotonic() - started) * 1000))

    rss = psutil.Process().memory_info().rss
    logger.info(f"💾 进程内存 {rss / 1024 / 1024:.1f} MB")
    return code


if __name__ == "__main__":
    sys.exit(main())
