"""Command-line entry point.

Exit status is 0 on success, 1 for usage or validation errors and 2 for
numerical failures (singular systems, failed factorizations).
"""

import argparse
import sys

import numpy as np

from . import fileio
from .baselines import leverage_distribution, uniform_distribution, weighted_sample_without_replacement
from .bayes import BayesianPrior, RandomizedGreedyConfig, lmmse_estimate, select_greedy, select_randomized_greedy
from .bench.config import EXPERIMENTS, default_config, load_config_file, parse_epsilons
from .bench.experiments import run_experiment
from .graphs import erdos_renyi, uav_network
from .omp import SamplingSet, iterative_select, reconstruct_gls, reconstruct_noiseless
from .rng import RngStream
from .spectral import ADJACENCY, LAPLACIAN, FrequencySupport, NoiseModel, build_spectral_basis, frequency_submatrix
from .support import SignalBatch, adaptive_sample, recover_support

METHODS = ("omp", "greedy", "rgreedy", "uniform", "leverage")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _common():
    p = _Parser(add_help=False)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--out", help="output path")
    p.add_argument("--config", help="INI file with a [bench] section")
    return p


def _graph_args(p, required=True):
    p.add_argument("--graph", required=required, help="Matrix Market graph file")
    p.add_argument("--kind", choices=(ADJACENCY, LAPLACIAN), default=ADJACENCY,
                   help="spectral basis from the adjacency or its Laplacian")


def build_parser():
    parser = _Parser(prog="gsp-sampling", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    p = sub.add_parser("gen-graph", parents=[common], help="write a random graph")
    p.add_argument("--model", choices=("er", "uav"), default="er")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--side", type=float, default=10.0)
    p.add_argument("--radius", type=float, default=0.3)

    p = sub.add_parser("basis", parents=[common], help="write the spectral basis")
    _graph_args(p)

    p = sub.add_parser("sample", parents=[common], help="select a sampling set")
    _graph_args(p)
    p.add_argument("--method", choices=METHODS, default="omp")
    p.add_argument("--k", type=int, required=True, help="bandwidth (first k frequencies)")
    p.add_argument("--m", type=int, required=True, help="number of samples")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--start-node", type=int, default=0)
    p.add_argument("--prior-variance", type=float, default=1.0)
    p.add_argument("--noise-variance", type=float, default=1e-2)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct a signal from samples")
    _graph_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", required=True, help="sampling set CSV (rank,node_index)")
    p.add_argument("--signal", required=True, help="vertex signal CSV (node,value)")
    p.add_argument("--method", choices=("ls", "lmmse"), default="ls")
    p.add_argument("--noise-variance", type=float, default=0.0)
    p.add_argument("--prior-variance", type=float, default=1.0)

    p = sub.add_parser("support", parents=[common], help="recover the frequency support")
    _graph_args(p)
    p.add_argument("--signals", required=True, help="signal batch CSV (node,signal_0,...)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sample-out", help="also pick m nodes on the recovered support")
    p.add_argument("--m", type=int)

    p = sub.add_parser("bench", parents=[common], help="run an experiment and write its CSV")
    p.add_argument("experiment", choices=[e.replace("_", "-") for e in EXPERIMENTS])
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", action="store_true", help="leave wall_clock_ns empty")
    p.add_argument("--full", action="store_true", help="full-scale settings")
    p.add_argument("--graph", dest="graph_path", help="Matrix Market graph (roadnet)")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--k", dest="k_values", type=_int_list, help="comma-separated bandwidths")
    p.add_argument("--m", dest="m_values", type=_int_list, help="comma-separated budgets")
    p.add_argument("--epsilon", dest="epsilons", type=parse_epsilons,
                   help="comma-separated epsilons; 'min' means exp(-m)")
    p.add_argument("--num-signals", type=_int_list)
    p.add_argument("--noise-levels", type=_float_list)
    return parser


def _file_config(args):
    return load_config_file(args.config) if args.config else {}


def _seed(args):
    if args.seed is not None:
        return args.seed
    return _file_config(args).get("master_seed", 0)


def _require_out(args):
    if not args.out:
        raise ValueError("--out is required")
    return args.out


def _basis(args):
    return build_spectral_basis(fileio.load_matrix_market(args.graph, args.kind))


def _cmd_gen_graph(args):
    stream = RngStream(_seed(args))
    if args.model == "er":
        graph = erdos_renyi(args.n, args.p, stream.generator())
        note = f"Erdos-Renyi n={args.n} p={args.p} seed={_seed(args)}"
    else:
        graph, _ = uav_network(args.n, args.side, args.radius, stream.generator())
        note = f"geometric n={args.n} side={args.side} radius={args.radius} seed={_seed(args)}"
    fileio.write_matrix_market(_require_out(args), graph, pattern=True, comment=note)


def _cmd_basis(args):
    out = _require_out(args)
    basis = _basis(args)
    header = ["index", "eigenvalue"] + [f"node_{i}" for i in range(basis.n)]
    rows = ([j, basis.eigenvalues[j]] + list(basis.V[:, j]) for j in range(basis.n))
    fileio.write_rows(out, header, rows)


def _cmd_sample(args):
    if args.method == "omp" and args.m < args.k:
        raise ValueError(f"omp needs m >= k, got m={args.m}, k={args.k}")
    if args.k < 1 or args.m < 1:
        raise ValueError("k and m must be positive")
    out = _require_out(args)
    basis = _basis(args)
    U = frequency_submatrix(basis, FrequencySupport.first(args.k))
    stream = RngStream(_seed(args))
    if args.method == "omp":
        S = iterative_select(U, args.m, args.start_node)
    elif args.method in ("uniform", "leverage"):
        dist = uniform_distribution(U.shape[0]) if args.method == "uniform" else leverage_distribution(U)
        S = weighted_sample_without_replacement(dist, args.m, stream.generator())
    else:
        prior = BayesianPrior.isotropic(args.k, args.prior_variance)
        noise = NoiseModel.white(args.noise_variance)
        if args.method == "greedy":
            S, _ = select_greedy(U, prior, noise, args.m)
        else:
            S, _ = select_randomized_greedy(
                U, prior, noise, RandomizedGreedyConfig(args.m, args.epsilon, stream))
    fileio.write_sampling_set(out, S)


def _cmd_reconstruct(args):
    out = _require_out(args)
    basis = _basis(args)
    U = frequency_submatrix(basis, FrequencySupport.first(args.k))
    S = SamplingSet(tuple(fileio.read_sampling_order(args.samples)))
    S.check_bounds(U.shape[0])
    y = fileio.read_vector(args.signal)
    if y.shape[0] != U.shape[0]:
        raise ValueError(f"signal has {y.shape[0]} entries, graph has {U.shape[0]} nodes")
    ys = y[S.index]
    if args.method == "lmmse":
        rec = lmmse_estimate(U, BayesianPrior.isotropic(args.k, args.prior_variance),
                             NoiseModel.white(args.noise_variance), S, ys)
    elif len(S) == args.k and args.noise_variance == 0:
        rec = reconstruct_noiseless(U, S, ys)
    else:
        rec = reconstruct_gls(U, S, ys, args.noise_variance if args.noise_variance > 0 else 1.0)
    fileio.write_vector(out, rec.x_hat)
    print(f"condition_number={rec.condition_number!r}", file=sys.stderr)


def _cmd_support(args):
    out = _require_out(args)
    basis = _basis(args)
    batch = SignalBatch(fileio.read_signal_batch(args.signals), basis)
    if args.sample_out:
        est, S = adaptive_sample(batch, basis, args.k, "omp", m=args.m or args.k)
        fileio.write_sampling_set(args.sample_out, S)
    else:
        est = recover_support(batch.spectral_signals, args.k)
    fileio.write_support_estimate(out, est)


_BENCH_KEYS = ("n", "p", "k_values", "m_values", "epsilons", "num_signals", "noise_levels",
               "trials", "workers", "graph_path", "out")


def bench_config(args):
    """Defaults, then the config file, then explicit flags."""
    experiment = args.experiment.replace("-", "_")
    merged = _file_config(args)
    merged.pop("experiment", None)
    full = args.full or merged.pop("full", False)
    for key in _BENCH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if args.seed is not None:
        merged["master_seed"] = args.seed
    if args.no_timing:
        merged["timing"] = False
    return default_config(experiment, full=full, **merged)


def _cmd_bench(args):
    cfg = bench_config(args)
    if not cfg.out:
        raise ValueError("--out is required")
    if cfg.experiment == "roadnet" and not cfg.graph_path:
        raise ValueError("roadnet needs --graph")
    _, rows = run_experiment(cfg)
    print(f"{cfg.experiment}: wrote {len(rows)} rows to {cfg.out}", file=sys.stderr)


COMMANDS = {
    "gen-graph": _cmd_gen_graph,
    "basis": _cmd_basis,
    "sample": _cmd_sample,
    "reconstruct": _cmd_reconstruct,
    "support": _cmd_support,
    "bench": _cmd_bench,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except np.linalg.LinAlgError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
