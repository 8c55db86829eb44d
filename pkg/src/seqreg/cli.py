"""Command-line surface: run games, verify bounds, compute complexities.

Subcommands: run | bound | complexity | lowerbound | admissibility. Every
command emits CSV (to --out or stdout) with reals printed at 12 significant
digits, rows sorted deterministically, and exits 0 when all checks pass,
1 on a bound violation or failed check, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .adversary import (
    BlockAdversary,
    Environment,
    ShatteringAdversary,
    StochasticEnvironment,
    lower_bound_value,
)
from .chaining import dudley_offset_bound
from .covers import cover_fat_relation_check, sequential_cover_size
from .entropy import EntropyFunction
from .forecasters import (
    FiniteClassForecaster,
    FiniteClassRelaxation,
    VAWForecaster,
    VAWRelaxation,
    admissibility_check,
    vaw_regret_bound,
)
from .function_class import load_class_file
from .protocol import GameConfig, Transcript, format_real, regret, run_game
from .rademacher import offset_rademacher, offset_rademacher_exact
from .rates import RateSpec, minimax_lower_rate, minimax_upper_rate, optimistic_regret_bound
from .shattering import fat_shattering_dim
from .trees import LabeledTree, ResourceLimitError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
_VIOLATION_TOL = 1e-9


class UsageError(Exception):
    pass


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_horizons(spec: str):
    try:
        horizons = [int(h) for h in spec.split(",") if h.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad horizon list {spec!r}") from exc
    if not horizons:
        raise UsageError("horizon list must be nonempty")
    return horizons


def _load_tree(path) -> LabeledTree:
    return LabeledTree.from_json(path)


def _covariate_table(m: int, d: int, seed: int) -> np.ndarray:
    """Deterministic unit-ball covariate vectors for the VAW game."""
    rng = np.random.default_rng([int(seed), 0xC0F])
    vecs = rng.standard_normal((m, d))
    norms = np.maximum(np.linalg.norm(vecs, axis=1, keepdims=True), 1e-12)
    radii = rng.uniform(0.2, 1.0, size=(m, 1))
    return vecs / norms * radii


def _build_environment(args, function_class, bound_B) -> Environment:
    if args.env == "iid":
        if function_class is None:
            raise UsageError("--env iid needs --class-file for the target function")
        names = list(function_class.names)
        idx = 0
        if args.fstar is not None:
            if args.fstar not in names:
                raise UsageError(f"unknown target function {args.fstar!r}")
            idx = names.index(args.fstar)
        return StochasticEnvironment(function_class.values[idx], args.noise_sd, bound_B)
    if args.x_tree is None:
        raise UsageError(f"--env {args.env} needs --x-tree")
    x_tree = _load_tree(args.x_tree)
    witness = (
        _load_tree(args.witness_tree)
        if args.witness_tree
        else LabeledTree.constant(x_tree.depth, 0.0)
    )
    base = ShatteringAdversary(
        x_tree, witness, args.beta, bound_B, function_class=function_class
    )
    if args.env == "shatter":
        return base
    return BlockAdversary(base, args.blocks_k)


def _env_capacity(env: Environment) -> int:
    if isinstance(env, BlockAdversary):
        return env.effective_horizon
    if isinstance(env, ShatteringAdversary):
        return env.x_tree.depth
    return 1 << 62


def cmd_run(args) -> int:
    function_class = load_class_file(args.class_file) if args.class_file else None
    B = args.bound_B
    horizons = _parse_horizons(args.horizons)
    seeds = [args.seed + i for i in range(args.num_seeds)]

    if args.forecaster == "finite":
        if function_class is None:
            raise UsageError("--forecaster finite needs --class-file")
        bound_name = "finite_experts"
        domain = function_class.domain_size
        table = None
    else:
        domain = args.domain_size or (function_class.domain_size if function_class else 0)
        if domain < 1:
            raise UsageError("--forecaster vaw needs --domain-size or --class-file")
        bound_name = "vaw_ridge"
        table = _covariate_table(domain, args.dim, args.seed)

    def one_game(n, seed):
        env = _build_environment(args, function_class, B)
        if n > _env_capacity(env):
            raise UsageError(
                f"horizon {n} exceeds the environment capacity {_env_capacity(env)}"
            )
        if args.forecaster == "finite":
            forecaster = FiniteClassForecaster(
                function_class, B, mixability_scale=args.mixability_scale
            )
        else:
            forecaster = VAWForecaster(args.dim, args.lam, B, covariate_map=table)
        transcript = run_game(forecaster, env, GameConfig(n, B, args.alpha, seed))
        loss = transcript.forecaster_loss()
        if args.forecaster == "finite":
            reg = regret(transcript, function_class)
            areg = (1.0 - args.alpha) * loss - (loss - reg)
            bound = args.mixability_scale * B * B * np.log(len(function_class))
        else:
            best = _ridge_benchmark(transcript, table, args.lam)
            reg = loss - best
            areg = (1.0 - args.alpha) * loss - best
            bound = vaw_regret_bound(n, args.dim, args.lam, B, 0.0)
        violation = max(0.0, reg - bound)
        return (n, seed, reg, areg, bound, violation)

    tasks = [(n, seed) for n in horizons for seed in seeds]
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(lambda t: one_game(*t), tasks))
    else:
        rows = [one_game(*t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["n,seed,regret,alpha_regret,bound,bound_name,violation,normalized"]
    failed = False
    for n, seed, reg, areg, bound, violation in rows:
        if violation > _VIOLATION_TOL:
            failed = True
        lines.append(
            f"{n},{seed},{format_real(reg)},{format_real(areg)},"
            f"{format_real(bound)},{bound_name},{format_real(violation)},0"
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _ridge_benchmark(transcript: Transcript, table: np.ndarray, lam: float) -> float:
    """min_f sum(f.x - y)^2 + lam ||f||^2 over all of R^d, in closed form."""
    d = table.shape[1]
    G = lam * np.eye(d)
    m = np.zeros(d)
    sq = 0.0
    for r in transcript.rounds:
        v = table[r.x]
        G += np.outer(v, v)
        m += r.y * v
        sq += r.y * r.y
    return float(sq - m @ np.linalg.solve(G, m))


def _regime_spec(regime: str, n: int, B: float) -> RateSpec:
    head, _, arg = regime.partition(":")
    key, _, value = arg.partition("=")
    if head == "power" and key == "p":
        return RateSpec("nonparametric", n, B, p=float(value))
    if head == "paramlog" and key == "d":
        return RateSpec("parametric", n, B, d=int(value))
    if head == "finite" and key == "size":
        return RateSpec("finite", n, B, size=int(value))
    raise UsageError(f"unrecognized regime {regime!r}")


def _dudley_for_regime(spec: RateSpec, B: float, entropy=None) -> float:
    """Chaining bound at the per-regime critical scale, normalized by n.

    `entropy` overrides the regime-derived model (e.g. a CSV table); the
    critical-scale recipe still follows the declared regime.
    """
    n = spec.horizon_n
    if spec.regime == "finite":
        if entropy is None:
            entropy = EntropyFunction.finite_class(spec.size)
        if entropy.kind == "finite":
            return dudley_offset_bound(entropy, 0.0, n, B, []) / n
        gamma = 1.0
    elif spec.regime == "parametric":
        if entropy is None:
            entropy = EntropyFunction.parametric_log(spec.d)
        gamma = n**-0.5
    else:
        if entropy is None:
            entropy = EntropyFunction.power_law(spec.p)
        gamma = 1.0 if spec.p > 2 else n ** (-1.0 / (spec.p + 2.0))
    rho = n ** (-1.0 / spec.p) if (spec.regime == "nonparametric" and spec.p > 2) else 1.0 / n
    rho = min(rho, gamma / 2.0)
    return dudley_offset_bound(entropy, gamma, n, B, [rho]) / n


def cmd_bound(args) -> int:
    horizons = _parse_horizons(args.horizons)
    entropy = EntropyFunction.parse(args.entropy) if args.entropy else None
    lines = ["n,regime,upper,lower,optimistic,dudley,normalized"]
    for n in sorted(horizons):
        spec = _regime_spec(args.regime, n, args.bound_B)
        upper = minimax_upper_rate(spec)
        try:
            lower = format_real(minimax_lower_rate(spec))
        except ValueError:
            lower = ""
        optimistic = optimistic_regret_bound(spec, args.lstar) / n
        dudley = _dudley_for_regime(spec, args.bound_B, entropy)
        lines.append(
            f"{n},{args.regime},{format_real(upper)},{lower},"
            f"{format_real(optimistic)},{format_real(dudley)},1"
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_complexity(args) -> int:
    function_class = load_class_file(args.class_file)
    if args.x_tree:
        x_tree = _load_tree(args.x_tree)
    else:
        rng = np.random.default_rng(args.seed)
        labels = rng.integers(0, function_class.domain_size, size=(1 << args.depth) - 1)
        x_tree = LabeledTree(args.depth, labels)
    mu_tree = (
        _load_tree(args.mu_tree)
        if args.mu_tree
        else LabeledTree.constant(x_tree.depth, 0.0)
    )
    rows = []
    for norm in ("l2", "linf"):
        res = sequential_cover_size(function_class, x_tree, args.beta, norm=norm)
        rows.append((f"cover_{norm}", float(res.size), res.mode, ""))
    fat = fat_shattering_dim(function_class, args.beta, max_depth=args.fat_max_depth)
    rows.append(("fat", float(fat), "exact", ""))
    if args.samples > 0:
        est = offset_rademacher(
            function_class, x_tree, mu_tree, args.bound_B, args.samples, args.seed
        )
    else:
        est = offset_rademacher_exact(function_class, x_tree, mu_tree, args.bound_B)
    rows.append(("offset_rademacher", est.value, est.mode, format_real(est.stderr)))
    failed = False
    if x_tree.depth <= 6:
        chain = cover_fat_relation_check(function_class, x_tree, args.beta)
        rows.append(("chain_check", 1.0 if chain.passed else 0.0, "exact", ""))
        failed = not chain.passed
    lines = ["quantity,value,mode,stderr"]
    for name, value, mode, stderr in rows:
        lines.append(f"{name},{format_real(value)},{mode},{stderr}")
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_lowerbound(args) -> int:
    function_class = load_class_file(args.class_file)
    x_tree = _load_tree(args.x_tree)
    witness = (
        _load_tree(args.witness_tree)
        if args.witness_tree
        else LabeledTree.constant(x_tree.depth, 0.0)
    )
    B = args.bound_B
    base = ShatteringAdversary(x_tree, witness, args.beta, B, function_class=function_class)
    if args.env == "block":
        env: Environment = BlockAdversary(base, args.blocks_k)
        horizon = env.effective_horizon
        target = lower_bound_value(args.beta, horizon, x_tree.depth, "p<=2")
    else:
        env = base
        horizon = x_tree.depth
        target = lower_bound_value(args.beta, horizon, horizon, "p>2")

    regrets = np.empty(args.episodes)
    for i in range(args.episodes):
        forecaster = FiniteClassForecaster(function_class, B)
        transcript = run_game(forecaster, env, GameConfig(horizon, B, 0.0, args.seed + i))
        regrets[i] = regret(transcript, function_class)
    mean = float(regrets.mean())
    stderr = float(regrets.std(ddof=1) / np.sqrt(args.episodes)) if args.episodes > 1 else 0.0
    passed = mean >= target - 4.0 * stderr
    lines = [
        "episodes,horizon,mean_regret,stderr,target,passed",
        f"{args.episodes},{horizon},{format_real(mean)},{format_real(stderr)},"
        f"{format_real(target)},{int(passed)}",
    ]
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_admissibility(args) -> int:
    B = args.bound_B
    rng = np.random.default_rng(args.seed)
    y_grid = np.linspace(-B, B, args.y_grid_size)
    if args.forecaster == "finite":
        function_class = load_class_file(args.class_file)
        rel = FiniteClassRelaxation(function_class, B, args.mixability_scale)
        domain = function_class.domain_size
        x_grid = list(range(domain))

        def draw_x():
            return int(rng.integers(0, domain))

    else:
        rel = VAWRelaxation(args.dim, args.lam, B, args.rounds)
        pool = [v for v in _covariate_table(8, args.dim, args.seed)]
        x_grid = pool

        def draw_x():
            return pool[int(rng.integers(0, len(pool)))]

    worst_by_round = np.full(args.rounds, np.inf)
    for _ in range(args.histories):
        xs, ys = [], []
        for t in range(args.rounds):
            result = admissibility_check(rel, xs, ys, x_grid, y_grid, B)
            worst_by_round[t] = min(worst_by_round[t], result.worst_slack)
            xs.append(draw_x())
            ys.append(float(rng.uniform(-B, B)))
    passed = bool(np.all(worst_by_round >= -1e-9))
    lines = ["round,worst_slack,passed"]
    for t in range(args.rounds):
        lines.append(
            f"{t + 1},{format_real(worst_by_round[t])},{int(worst_by_round[t] >= -1e-9)}"
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _common_parser(bound_default: float = 1.0) -> argparse.ArgumentParser:
    # fresh parent per subcommand: argparse parents share action objects, so
    # per-command defaults must not touch a shared instance
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output CSV path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bound-B", dest="bound_B", type=float, default=bound_default)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[_common_parser()], help="play games, report regret vs bound")
    p_run.add_argument("--forecaster", choices=["finite", "vaw"], required=True)
    p_run.add_argument("--class-file", default=None)
    p_run.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_run.add_argument("--dim", type=int, default=2)
    p_run.add_argument("--domain-size", type=int, default=0)
    p_run.add_argument("--env", choices=["iid", "shatter", "block"], default="iid")
    p_run.add_argument("--noise-sd", type=float, default=0.25)
    p_run.add_argument("--fstar", default=None)
    p_run.add_argument("--x-tree", default=None)
    p_run.add_argument("--witness-tree", default=None)
    p_run.add_argument("--beta", type=float, default=0.5)
    p_run.add_argument("--blocks-k", type=int, default=1)
    p_run.add_argument("--horizons", default="50")
    p_run.add_argument("--num-seeds", type=int, default=1)
    p_run.add_argument("--alpha", type=float, default=0.0)
    p_run.add_argument("--mixability-scale", dest="mixability_scale", type=float,
                       default=1.0, help="soft-min tuning; 2 is the admissible one")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=cmd_run)

    p_bound = sub.add_parser("bound", parents=[_common_parser()], help="rate-table evaluations")
    p_bound.add_argument("--regime", required=True, help="power:p=V | paramlog:d=V | finite:size=V")
    p_bound.add_argument("--horizons", required=True)
    p_bound.add_argument("--lstar", type=float, default=0.0)
    p_bound.add_argument(
        "--entropy", default=None,
        help="override the dudley entropy model: power:p=V, paramlog:d=V, "
             "finite:size=V, or a CSV of beta,entropy rows",
    )
    p_bound.set_defaults(func=cmd_bound)

    p_cx = sub.add_parser("complexity", parents=[_common_parser()], help="covers, fat dimension, offset Rademacher")
    p_cx.add_argument("--class-file", required=True)
    p_cx.add_argument("--x-tree", default=None)
    p_cx.add_argument("--depth", type=int, default=3)
    p_cx.add_argument("--mu-tree", default=None)
    p_cx.add_argument("--beta", type=float, default=0.5)
    p_cx.add_argument("--samples", type=int, default=0, help="0 = exact enumeration")
    p_cx.add_argument("--fat-max-depth", type=int, default=6)
    p_cx.set_defaults(func=cmd_complexity)

    p_lb = sub.add_parser("lowerbound", parents=[_common_parser(bound_default=4.0)], help="witness regret lower bounds")
    p_lb.add_argument("--class-file", required=True)
    p_lb.add_argument("--x-tree", required=True)
    p_lb.add_argument("--witness-tree", default=None)
    p_lb.add_argument("--beta", type=float, required=True)
    p_lb.add_argument("--episodes", type=int, default=2000)
    p_lb.add_argument("--env", choices=["shatter", "block"], default="shatter")
    p_lb.add_argument("--blocks-k", type=int, default=1)
    p_lb.set_defaults(func=cmd_lowerbound)

    p_adm = sub.add_parser("admissibility", parents=[_common_parser()], help="verify the recursive inequality")
    p_adm.add_argument("--forecaster", choices=["finite", "vaw"], required=True)
    p_adm.add_argument("--class-file", default=None)
    p_adm.add_argument("--dim", type=int, default=2)
    p_adm.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_adm.add_argument("--mixability-scale", dest="mixability_scale", type=float,
                       default=1.0, help="soft-min tuning; 2 is the admissible one")
    p_adm.add_argument("--histories", type=int, default=50)
    p_adm.add_argument("--rounds", type=int, default=10)
    p_adm.add_argument("--y-grid-size", type=int, default=41)
    p_adm.set_defaults(func=cmd_admissibility)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IndexError, ResourceLimitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
