"""命令行入口

子命令：gen / learn / learn-outlier / tc / norm2p / eval。
矩阵统一用 CSV，结果 JSON 输出到 stdout 或 --out 指定的文件，日志写 stderr。
退出码：0 成功，1 用法或输入文件错误，2 数值或契约违例。
"""
import argparse
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from dictapprox.core.config import settings
from dictapprox.core.exceptions import DictApproxError, MatrixFormatError, UsageError
from dictapprox.core.logger import attach_run_log, setup_logger
from dictapprox.models.dictionary import DictModel
from dictapprox.models.learning import (
    OUTLIER_TRACE_COLUMNS,
    TRACE_COLUMNS,
    LearnConfig,
    LearnTrace,
    OutlierConfig,
    OutlierTraceRecord,
    TraceRecord,
)
from dictapprox.models.metrics import RunSummary
from dictapprox.models.norms import NormInstance
from dictapprox.models.planted import PlantedInstance
from dictapprox.models.signal import SignalMatrix
from dictapprox.models.tc import TCInstance
from dictapprox.services.eval_service import eval_against_truth
from dictapprox.services.norm_service import lower_bound_2_to_p, ratio_diagnostic, sphere_sweep_2_to_p
from dictapprox.services.outlier_service import outlier_dict_approx
from dictapprox.services.pursuit_service import dict_approx
from dictapprox.services.synth_service import DICT_KINDS, generate
from dictapprox.services.tc_service import BicriteriaTCSolver, oracle_grid, oracle_sample
from dictapprox.utils.matrix_io import (
    dumps_json,
    read_json,
    read_matrix_csv,
    read_rows_csv,
    write_json,
    write_matrix_csv,
    write_rows_csv,
)

logger = setup_logger("dictapprox.cli")

MODEL_FILE = "model.json"
TRACE_FILE = "trace.csv"
RUN_FILE = "run.json"
OUTLIERS_FILE = "outliers.json"


class CliParser(argparse.ArgumentParser):
    """用法错误抛出 UsageError（退出码 1），而不是 argparse 默认的 2"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(payload: dict, out: Optional[str]) -> None:
    if out:
        write_json(out, payload)
    else:
        sys.stdout.write(dumps_json(payload) + "\n")


def _learn_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="信号矩阵 X.csv（d 行 n 列）")
    parser.add_argument("--k", type=int, required=True, help="稀疏度 k")
    parser.add_argument("--m", type=int, required=True, help="字典大小 m")
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0, help="范数界 Lambda（>= 1）")
    parser.add_argument("--epsilon", type=float, required=True, help="精度 epsilon，(0, 1]")
    parser.add_argument("--max-iters", type=int, default=None, help="覆盖推导的迭代上限")
    parser.add_argument("--out", default=None, help="输出目录；缺省时 run.json 写在 model.json 旁边")
    parser.add_argument("--out-model", default=None, help="model.json 路径，默认写入输出目录")
    parser.add_argument("--out-trace", default=None, help="trace.csv 路径，默认写入输出目录")


def _run_paths(args) -> Dict[str, Path]:
    """解析 learn / learn-outlier 的输出路径

    Returns:
        Dict[str, Path]: run_dir、model、trace 三个路径；--out 缺省时 run_dir 取 model.json 所在目录
    """
    if args.out is None and (args.out_model is None or args.out_trace is None):
        raise UsageError("需要 --out，或同时给出 --out-model 与 --out-trace")
    model = Path(args.out_model) if args.out_model else Path(args.out) / MODEL_FILE
    trace = Path(args.out_trace) if args.out_trace else Path(args.out) / TRACE_FILE
    run_dir = Path(args.out) if args.out is not None else model.parent
    return {"run_dir": run_dir, "model": model, "trace": trace}


def _file_refs(paths: Dict[str, Path], **extra: Path) -> Dict[str, str]:
    refs = {"model": paths["model"], "trace": paths["trace"], **extra}
    return {key: str(path.resolve()) for key, path in refs.items()}


def cmd_gen(args) -> int:
    instance = generate(
        d=args.d,
        n=args.n,
        m=args.m,
        k=args.k,
        noise_ratio=args.noise_ratio,
        rho=args.rho,
        dict_kind=args.dict_kind,
        seed=args.seed,
    )
    out = Path(args.out)
    write_matrix_csv(out / "X.csv", instance.X.data)
    write_json(out / "truth.json", instance.to_truth_json())
    _emit({
        "X": str(out / "X.csv"),
        "truth": str(out / "truth.json"),
        "gamma_star": instance.gamma_star_actual,
        "lambda": instance.lambda_actual,
        "outliers": len(instance.outlier_indices),
    }, None)
    return 0


def cmd_learn(args) -> int:
    paths = _run_paths(args)
    X = SignalMatrix(read_matrix_csv(args.input))
    config = LearnConfig.create(
        k=args.k, m=args.m, lam=args.lam, epsilon=args.epsilon, max_iters_override=args.max_iters
    )
    start = time.perf_counter()
    model, trace = dict_approx(X, config, n_jobs=args.threads)
    wall_time_ms = (time.perf_counter() - start) * 1000

    write_json(paths["model"], model.to_json())
    write_rows_csv(paths["trace"], TRACE_COLUMNS, (r.as_row() for r in trace.records))
    summary = RunSummary(
        psi_final=trace.final.psi,
        atom_count=model.atom_count,
        max_sparsity=model.max_code_length,
        wall_time_ms=wall_time_ms,
    )
    run = {
        "command": "learn",
        "config": config.echo(),
        "termination_reason": trace.termination_reason,
        "summary": summary.model_dump(),
        "files": _file_refs(paths),
    }
    write_json(paths["run_dir"] / RUN_FILE, run)
    _emit(run, None)
    return 0


def cmd_learn_outlier(args) -> int:
    paths = _run_paths(args)
    X = SignalMatrix(read_matrix_csv(args.input))
    config = OutlierConfig.create(
        k=args.k,
        m=args.m,
        lam=args.lam,
        epsilon=args.epsilon,
        rho=args.rho,
        max_iters_override=args.max_iters,
    )
    start = time.perf_counter()
    result = outlier_dict_approx(X, config, n_jobs=args.threads)
    wall_time_ms = (time.perf_counter() - start) * 1000

    outliers_path = paths["run_dir"] / OUTLIERS_FILE
    write_json(paths["model"], result.model.to_json())
    write_json(outliers_path, {"indices": result.outlier_indices})
    write_rows_csv(paths["trace"], OUTLIER_TRACE_COLUMNS, (r.as_row() for r in result.trace))
    summary = RunSummary(
        psi_hat_final=result.psi_hat_final,
        atom_count=result.model.atom_count,
        max_sparsity=result.model.max_code_length,
        wall_time_ms=wall_time_ms,
    )
    run = {
        "command": "learn-outlier",
        "config": config.echo(),
        "termination_reason": result.termination_reason,
        "summary": summary.model_dump(),
        "files": _file_refs(paths, outliers=outliers_path),
    }
    write_json(paths["run_dir"] / RUN_FILE, run)
    _emit(run, None)
    return 0


def cmd_tc(args) -> int:
    vectors = read_matrix_csv(args.input)
    if args.weights:
        weights = read_matrix_csv(args.weights).ravel()
    else:
        weights = np.ones(vectors.shape[1])
    instance = TCInstance(vectors=vectors, weights=weights, tau=args.tau)
    solution = BicriteriaTCSolver(n_jobs=args.threads).solve(instance)
    payload = solution.to_json()
    if args.oracle == "grid":
        value, x = oracle_grid(instance, args.resolution)
        payload["oracle"] = {"kind": "grid", "value": value, "x": [float(v) for v in x]}
    elif args.oracle == "sample":
        value, x = oracle_sample(instance, args.samples, args.seed)
        payload["oracle"] = {"kind": "sample", "value": value, "x": [float(v) for v in x]}
    _emit(payload, args.out)
    return 0


def cmd_norm2p(args) -> int:
    instance = NormInstance(A=read_matrix_csv(args.input), p=args.p)
    result = lower_bound_2_to_p(instance, n_jobs=args.threads)
    payload = result.to_json()
    if args.oracle == "grid":
        sweep, _ = sphere_sweep_2_to_p(instance.A, instance.p, args.resolution)
        payload["oracle"] = {"kind": "grid", **ratio_diagnostic(result, sweep)}
    _emit(payload, args.out)
    return 0


def _load_run(run_dir: Path) -> dict:
    run = read_json(run_dir / RUN_FILE)
    if not isinstance(run, dict) or "config" not in run or "command" not in run:
        raise MatrixFormatError(f"{run_dir / RUN_FILE} 缺少 command/config 字段")
    return run


def _config_from_echo(run: dict) -> LearnConfig:
    echo = run["config"]
    fields = {
        "k": echo.get("k"),
        "m": echo.get("m"),
        "lam": echo.get("lambda"),
        "epsilon": echo.get("epsilon"),
        "max_iters_override": echo.get("max_iters_override"),
    }
    if run["command"] == "learn-outlier":
        return OutlierConfig.create(rho=echo.get("rho"), **fields)
    return LearnConfig.create(**fields)


def _run_file(run: dict, run_dir: Path, key: str, default_name: str) -> Path:
    """run.json 记录的文件路径优先；未记录或已不存在（运行目录被搬移）时退回目录内的默认文件名"""
    recorded = run.get("files", {}).get(key)
    if recorded and Path(recorded).exists():
        return Path(recorded)
    return run_dir / default_name


def cmd_eval(args) -> int:
    X = SignalMatrix(read_matrix_csv(args.input))
    run_dir = Path(args.run)
    run = _load_run(run_dir)
    model = DictModel.from_json(read_json(_run_file(run, run_dir, "model", MODEL_FILE)), d=X.d)
    config = _config_from_echo(run)
    truth = PlantedInstance.from_truth_json(X, read_json(args.truth)) if args.truth else None

    rows = read_rows_csv(_run_file(run, run_dir, "trace", TRACE_FILE))
    wall_time_ms = float(run.get("summary", {}).get("wall_time_ms", 0.0))
    try:
        if run["command"] == "learn-outlier":
            outliers = read_json(_run_file(run, run_dir, "outliers", OUTLIERS_FILE))["indices"]
            metrics = eval_against_truth(
                model, X, truth, config=config,
                outlier_indices=outliers,
                outlier_trace=[OutlierTraceRecord(**row) for row in rows],
                wall_time_ms=wall_time_ms,
            )
        else:
            trace = LearnTrace(
                records=[TraceRecord(**row) for row in rows],
                model=model,
                termination_reason=run.get("termination_reason", "max_iters"),
            )
            metrics = eval_against_truth(model, X, truth, config=config, trace=trace, wall_time_ms=wall_time_ms)
    except (KeyError, TypeError) as e:
        raise MatrixFormatError(f"运行目录 {run_dir} 内容不完整: {e}")

    _emit(metrics.model_dump(mode="json"), args.out)
    if truth is not None and not metrics.bounds_hold():
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = CliParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="随机种子")
    common.add_argument("--threads", type=int, default=settings.DEFAULT_THREADS, help="候选扫描线程数")

    parser = CliParser(prog="dictapprox", description="无分布假设的近似字典学习")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="生成带真值的合成实例")
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--noise-ratio", type=float, default=0.0)
    gen.add_argument("--rho", type=float, default=0.0)
    gen.add_argument("--dict-kind", choices=DICT_KINDS, default="orthonormal")
    gen.add_argument("--out", required=True, help="输出目录（X.csv、truth.json）")
    gen.set_defaults(handler=cmd_gen)

    learn = sub.add_parser("learn", parents=[common], help="运行 DictApprox")
    _learn_config_args(learn)
    learn.set_defaults(handler=cmd_learn)

    learn_outlier = sub.add_parser("learn-outlier", parents=[common], help="运行 OutlierDictApprox")
    _learn_config_args(learn_outlier)
    learn_outlier.add_argument("--rho", type=float, required=True, help="离群比例 rho，[0, 1)")
    learn_outlier.set_defaults(handler=cmd_learn_outlier)

    tc = sub.add_parser("tc", parents=[common], help="求解一个 tau-TC 实例")
    tc.add_argument("--input", required=True, help="向量矩阵 V.csv（d 行 n 列，每列一个向量）")
    tc.add_argument("--weights", default=None, help="权重 CSV，缺省全为 1")
    tc.add_argument("--tau", type=float, required=True)
    tc.add_argument("--oracle", choices=("none", "grid", "sample"), default="none")
    tc.add_argument("--samples", type=int, default=10000, help="oracle_sample 样本数")
    tc.add_argument("--resolution", type=float, default=None, help="oracle_grid 角分辨率")
    tc.add_argument("--out", default=None)
    tc.set_defaults(handler=cmd_tc)

    norm = sub.add_parser("norm2p", parents=[common], help="2->p 范数下界")
    norm.add_argument("--input", required=True, help="矩阵 A.csv（n 行 d 列）")
    norm.add_argument("--p", type=float, required=True)
    norm.add_argument("--oracle", choices=("none", "grid"), default="none", help="grid：d <= 3 时附带球面扫描与比值诊断")
    norm.add_argument("--resolution", type=float, default=None, help="球面扫描角分辨率")
    norm.add_argument("--out", default=None)
    norm.set_defaults(handler=cmd_norm2p)

    evaluate = sub.add_parser("eval", parents=[common], help="对照真值评估一次运行")
    evaluate.add_argument("--input", required=True, help="信号矩阵 X.csv")
    evaluate.add_argument("--run", required=True, help="learn / learn-outlier 的输出目录")
    evaluate.add_argument("--truth", default=None, help="gen 生成的 truth.json")
    evaluate.add_argument("--out", default=None)
    evaluate.set_defaults(handler=cmd_eval)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError(f"--threads 必须为正整数: {args.threads}")
        attach_run_log(logger, args.command)
        logger.info(f"执行子命令 {args.command}")
        return args.handler(args)
    except DictApproxError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        sys.stderr.write(dumps_json({"error": e.message, "type": type(e).__name__}) + "\n")
        return e.exit_code
    except OSError as e:
        logger.error(f"文件读写失败: {e}")
        sys.stderr.write(dumps_json({"error": str(e), "type": "OSError"}) + "\n")
        return 1
