#!/usr/bin/env python3
"""
Kernel-AWV Benchmark CLI
Runs forecasters over datasets, reports regret, builds adversarial streams and rate tables
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

# Add scripts directory to path
sys.path.append(str(Path(__file__).parent))

from adversary import adversary_generate
from benchmark_runner import read_records, run_stream, summarize_run, write_records
from datasets import Dataset, ingest, scale, synthetic_regression, to_classification, write_dataset
from forecast_errors import ForecastError, InputError
from kawv_config import ALGORITHMS, FORMATS, PRESETS, TASKS, HarnessConfig, log_level, results_dir
from kernel_core import KernelSpec, gram, spectral_regret_bound
from rate_tables import RateQuery, emit_rates, write_rates
from regret_ledger import regret_report

logger = logging.getLogger(__name__)


def _float_list(raw: str) -> List[float]:
    try:
        return [float(v) for v in raw.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{raw}'")


def _algo(raw: str) -> str:
    name = raw.replace('-', '_')
    if name not in ALGORITHMS:
        raise argparse.ArgumentTypeError(f"unknown algorithm '{raw}'")
    return name


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--data', required=True, help='Dataset path')
    parser.add_argument('--format', choices=FORMATS, default='csv')
    parser.add_argument('--label-column', default=None, help='CSV label column name or index (default: last)')
    parser.add_argument('--scale', action='store_true', help='Scale x to [-1,1]^d and y to [-1,1]')
    parser.add_argument('--task', choices=TASKS, default=None)


def _add_forecaster_arguments(parser: argparse.ArgumentParser, algo_required: bool = False) -> None:
    parser.add_argument('--preset', choices=sorted(PRESETS), default='experiments')
    parser.add_argument('--algo', type=_algo, default=None, required=algo_required,
                        help='exact | taylor | nystrom | nystrom-beforehand | fogd')
    parser.add_argument('--lambda', dest='lam', type=float, default=None)
    parser.add_argument('--sigma', type=float, default=None)
    parser.add_argument('--M', type=int, default=None, help='Taylor degree cap (default: chosen from R, sigma, n, lambda)')
    parser.add_argument('--mu', type=float, default=None)
    parser.add_argument('--beta', type=float, default=None)
    parser.add_argument('--eps', type=float, default=None)
    parser.add_argument('--delta', type=float, default=None)
    parser.add_argument('--D', type=int, default=None)
    parser.add_argument('--eta', type=float, default=None)
    parser.add_argument('--seed', type=int, default=None, help='Default: KAWV_SEED, else 0')
    parser.add_argument('--B', type=float, default=None, help='Label bound used in the regret bounds')
    parser.add_argument('--limit-n', type=int, default=None)
    parser.add_argument('--timeout-s', type=int, default=None)
    parser.add_argument('--krr', action='store_true',
                        help='Kernel ridge variant: predict x_t before adding it to the system')


def _config(args: argparse.Namespace) -> HarnessConfig:
    return HarnessConfig.from_preset(
        args.preset,
        algo=args.algo, lam=args.lam, sigma=args.sigma, M=args.M, mu=args.mu, beta=args.beta,
        eps=args.eps, delta=args.delta, D=args.D, eta=args.eta, seed=args.seed, B=args.B,
        task=getattr(args, 'task', None), limit_n=args.limit_n, timeout_s=args.timeout_s, krr=args.krr,
    )


def _load(args: argparse.Namespace, task: str = 'regression') -> Dataset:
    dataset = ingest(args.data, args.format, args.label_column)
    if args.scale:
        dataset = scale(dataset)
    if task == 'classification':
        dataset = to_classification(dataset)
    return dataset


def cmd_run(args: argparse.Namespace) -> int:
    config = _config(args)
    dataset = _load(args, config.task)
    print(f"🚀 Running {config.algo} on {dataset.name} (n={dataset.n}, d={dataset.d})", file=sys.stderr)

    records = run_stream(config, dataset)
    summary = summarize_run(records, config.task)
    summary['config'] = config.as_dict()

    if args.out == '-':
        write_records(records, sys.stdout)
        print(json.dumps(summary), file=sys.stderr)
        return 0

    out = args.out
    if out is None:
        os.makedirs(results_dir(), exist_ok=True)
        out = os.path.join(results_dir(), f"{config.algo}-{Path(dataset.name).stem}-seed{config.seed}.csv")
    write_records(records, out)
    print(f"✅ {len(records)} records written to {out}", file=sys.stderr)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_regret(args: argparse.Namespace) -> int:
    config = _config(args)
    dataset = _load(args, config.task)
    if args.records:
        records = read_records(args.records)
    else:
        print(f"🚀 Running {config.algo} on {dataset.name} (n={dataset.n})", file=sys.stderr)
        records = run_stream(config, dataset)

    print("📐 Computing comparator and spectral bounds...", file=sys.stderr)
    ledger = regret_report(records, dataset, config.lam, config.B, config)
    print(json.dumps(ledger.as_dict(), indent=2))
    return 0


def cmd_adversary(args: argparse.Namespace) -> int:
    config = _config(args)
    if not args.y_grid:
        raise InputError("--y-grid needs at least one value")
    print(f"😈 Building a {args.n}-round adversarial stream against {config.algo}", file=sys.stderr)
    dataset = adversary_generate(config, args.n, args.grid, args.y_grid, d=args.d)
    if args.out:
        write_dataset(dataset, args.out)

    result = {'n': dataset.n, 'd': dataset.d, 'algo': config.algo}
    if dataset.n <= 3000:
        ledger = regret_report(run_stream(config, dataset), dataset, config.lam, config.B, config)
        result['adversarial_regret'] = ledger.regret

    if args.compare_iid:
        iid_regrets = []
        for seed in range(args.compare_iid):
            rng = np.random.default_rng(seed)
            X = rng.uniform(-1.0, 1.0, size=(args.n, args.d))
            y = rng.choice(np.asarray(args.y_grid, dtype=float), size=args.n)
            iid = Dataset(X, y, f'iid-seed{seed}')
            iid_regrets.append(regret_report(run_stream(config, iid), iid, config.lam, config.B, config).regret)
        result['iid_regrets'] = iid_regrets
        if 'adversarial_regret' in result:
            result['adversary_wins'] = int(sum(result['adversarial_regret'] >= r for r in iid_regrets))

    print(json.dumps(result, indent=2))
    return 0


def cmd_rates(args: argparse.Namespace) -> int:
    a_grid = args.a_grid if args.a_grid else list(np.linspace(0.0, 1.0, args.a_steps))
    rows = emit_rates(RateQuery(gamma=args.gamma, a_grid=a_grid))
    write_rates(rows, sys.stdout if args.out == '-' else args.out)
    return 0


def cmd_deff(args: argparse.Namespace) -> int:
    dataset = _load(args)
    if dataset.n > 3000:
        dataset = dataset.head(3000)
        print("⚠️  Using the first 3000 examples for the dense spectrum", file=sys.stderr)
    K = gram(KernelSpec(sigma=args.sigma), dataset.X)
    rows = []
    for lam in args.lambdas:
        bound = spectral_regret_bound(K, lam, args.B, 0.0)
        rows.append({'lambda': lam, 'd_eff': bound.d_eff, 'log_det_sum': bound.log_det_sum,
                     'log_det_bound': bound.log_det_bound, 'd_eff_bound': bound.d_eff_bound})
    print(json.dumps({'n': dataset.n, 'sigma': args.sigma, 'rows': rows}, indent=2))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    dataset = synthetic_regression(args.n, args.d, args.seed, args.frequency, args.noise)
    write_dataset(dataset, args.out)
    print(f"✅ {dataset.n} synthetic examples written to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Online kernel regression benchmark harness')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Stream a dataset through one forecaster')
    _add_data_arguments(run)
    _add_forecaster_arguments(run, algo_required=True)
    run.add_argument('--out', default=None, help="Records CSV path ('-' for stdout, default: under KAWV_RESULTS_DIR)")
    run.set_defaults(handler=cmd_run)

    regret = commands.add_parser('regret', help='Regret against batch kernel ridge, with bounds')
    _add_data_arguments(regret)
    _add_forecaster_arguments(regret)
    regret.add_argument('--records', default=None, help='Reuse a records CSV instead of running')
    regret.set_defaults(handler=cmd_regret)

    adversary = commands.add_parser('adversary', help='Greedy grid adversary')
    _add_forecaster_arguments(adversary)
    adversary.add_argument('--n', type=int, required=True)
    adversary.add_argument('--d', type=int, default=1)
    adversary.add_argument('--grid', type=int, default=21, help='Grid points per input coordinate')
    adversary.add_argument('--y-grid', type=_float_list, default=[-1.0, 1.0])
    adversary.add_argument('--compare-iid', type=int, default=0, metavar='SEEDS',
                           help='Also report the regret on this many i.i.d. uniform streams')
    adversary.add_argument('--out', default=None, help='Write the generated stream as CSV')
    adversary.set_defaults(handler=cmd_adversary)

    rates = commands.add_parser('rates', help='Regret exponents under the capacity condition')
    rates.add_argument('--gamma', type=float, required=True)
    rates.add_argument('--a-grid', type=_float_list, default=None)
    rates.add_argument('--a-steps', type=int, default=21)
    rates.add_argument('--out', default='-')
    rates.set_defaults(handler=cmd_rates)

    deff = commands.add_parser('deff', help='Effective dimension and spectral bounds of a dataset')
    _add_data_arguments(deff)
    deff.add_argument('--sigma', type=float, default=1.0)
    deff.add_argument('--lambda', dest='lambdas', type=_float_list, default=[0.1, 1.0, 10.0])
    deff.add_argument('--B', type=float, default=1.0)
    deff.set_defaults(handler=cmd_deff)

    synth = commands.add_parser('synth', help='Write the smooth synthetic regression dataset')
    synth.add_argument('--n', type=int, default=5000)
    synth.add_argument('--d', type=int, default=2)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--frequency', type=float, default=1.0)
    synth.add_argument('--noise', type=float, default=0.1)
    synth.add_argument('--out', required=True)
    synth.set_defaults(handler=cmd_synth)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=log_level(), stream=sys.stderr,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ForecastError as e:
        logger.error(str(e))
        print(json.dumps({"error": str(e)}))
        return e.exit_code
    except Exception as e:
        logger.exception("unexpected failure")
        print(json.dumps({"error": str(e)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
