import argparse
import dataclasses
import logging
import os
import sys

import torch

from .errors import ConfigError, LinganError, TrialFailure
from .linalg import DTYPE
from .DataModel import Partition, SUPERVISED
from .losses import VARIANTS, PS_PINV, SUPERVISED_LOSS, LossSpec, loss_gradient, finite_diff_gradient, \
    entrywise_relative_error, random_instance
from .Config import ExperimentConfig, load_config, apply_env, format_config
from .experiments import run_sweep, write_csv, write_panel_csv, preset_config, PRESETS, \
    verify_theorem1, verify_orthonormal_invariance, verify_pseudometric, verify_concentration

__all__ = ['EXIT_OK', 'EXIT_CONFIG', 'EXIT_RUNTIME', 'EXIT_VERIFY', 'build_parser', 'main',
           'cmd_sweep', 'cmd_verify', 'cmd_check_gradients', 'cmd_demo']

logger = logging.getLogger(__name__)

##### Constants #######
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

SUITES = ('theorem1', 'pseudometric', 'orthonormal', 'concentration')
GRAD_TOL = 1e-4
GRAD_MEDIAN_TOL = 1e-6
#######################


def _resolve_config(path, workers):
    cfg = load_config(path) if path is not None else apply_env(ExperimentConfig())
    if workers is not None:
        cfg = dataclasses.replace(cfg, workers=workers)
    return cfg


def _provenance(cfg, out):
    out.write("# resolved config\n")
    out.write(format_config(cfg))


def cmd_sweep(args, out=sys.stdout, err=sys.stderr):
    """
    Run the sweep described by --config and write the records to --out.
    """
    cfg = _resolve_config(args.config, args.workers)
    _provenance(cfg, err)
    records = run_sweep(cfg)
    write_csv(records, args.out)
    out.write("wrote %d records to %s\n" % (len(records), args.out))
    return EXIT_OK


def cmd_verify(args, out=sys.stdout, err=sys.stderr):
    """
    Run one verification suite and print its report. Exit EXIT_VERIFY if it fails.
    """
    if args.suite == 'theorem1':
        cfg = _resolve_config(args.config, None)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, base_seed=args.seed)
        report = verify_theorem1(cfg)
    elif args.suite == 'pseudometric':
        report = verify_pseudometric(args.d, args.trials, args.seed or 0)
    elif args.suite == 'orthonormal':
        report = verify_orthonormal_invariance(args.d, args.k, args.seed or 0, draws=args.trials)
    else:
        report = verify_concentration(seed=args.seed or 0)
    out.write(str(report) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY


def _zero_g_case():
    ## supervised loss at G = 0 with one pair: the gradient is -2 x z^T.
    x = torch.tensor([[1.], [-2.], [0.5]], dtype=DTYPE)
    z = torch.tensor([[3.], [-1.]], dtype=DTYPE)
    part = Partition(x, z, torch.zeros(3, 0, dtype=DTYPE), kind=SUPERVISED)
    G = torch.zeros(3, 2, dtype=DTYPE)
    g = loss_gradient(LossSpec(SUPERVISED_LOSS), G, part)
    return float(torch.max(torch.abs(g + 2. * torch.matmul(x, z.T))))


def _near_singular_pinv_case(rng):
    spec, G, part = random_instance(PS_PINV, 6, 3, 8, n_ps=4, rng=rng)
    u, s, vh = torch.linalg.svd(G, full_matrices=False)
    s[-1] = 1e-3 * s[0]
    G = torch.matmul(u * s, vh)
    return entrywise_relative_error(loss_gradient(spec, G, part), finite_diff_gradient(spec, G, part))[0]


def check_gradients(seed, cases):
    """
    Compare the analytic gradient of every loss variant with central finite differences on random
    instances with d in 2..16, k in 1..8 and n in 2..10.

    Return:
        (dict {variant: (worst max relative error, worst median relative error)}, zero-G deviation,
        near-singular ps_pinv error)

    """
    rng = torch.Generator()
    rng.manual_seed(seed)
    worst = {}
    for variant in VARIANTS:
        w_max, w_med = 0., 0.
        for _ in range(cases):
            d = int(torch.randint(2, 17, (1,), generator=rng))
            k = int(torch.randint(1, 9, (1,), generator=rng))
            n = int(torch.randint(2, 11, (1,), generator=rng))
            spec, G, part = random_instance(variant, d, k, n, rng=rng, alpha=0.98)
            e_max, e_med = entrywise_relative_error(loss_gradient(spec, G, part), finite_diff_gradient(spec, G, part))
            w_max, w_med = max(w_max, e_max), max(w_med, e_med)
        worst[variant] = (w_max, w_med)
    return worst, _zero_g_case(), _near_singular_pinv_case(rng)


def cmd_check_gradients(args, out=sys.stdout, err=sys.stderr):
    worst, zero_dev, stress = check_gradients(args.seed, args.cases)
    ok = True
    for variant in VARIANTS:
        e_max, e_med = worst[variant]
        flag = e_max < GRAD_TOL and e_med < GRAD_MEDIAN_TOL
        ok = ok and flag
        out.write("%-16s worst relative error max %.3e median %.3e  %s\n"
                  % (variant, e_max, e_med, "ok" if flag else "FAIL"))
    flag = zero_dev < 1e-12
    ok = ok and flag
    out.write("%-16s |grad + 2 x z^T| %.3e  %s\n" % ("zero G", zero_dev, "ok" if flag else "FAIL"))
    out.write("%-16s worst relative error %.3e  (reported only)\n" % ("ps_pinv stress", stress))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_demo(args, out=sys.stdout, err=sys.stderr):
    """
    Run a figure preset and write the full table plus one CSV per panel into --out.
    """
    cfg, panels = preset_config(args.figure, trials=args.trials)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    else:
        cfg = apply_env(cfg)
    _provenance(cfg, err)

    os.makedirs(args.out, exist_ok=True)
    records = run_sweep(cfg)
    write_csv(records, os.path.join(args.out, "%s.csv" % args.figure))
    for metric in panels:
        path = os.path.join(args.out, "%s_%s.csv" % (args.figure, metric))
        write_panel_csv(records, path, metric)
        out.write("wrote %s\n" % path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="lingan", description="linear GAN overparameterization experiments")
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep and write its CSV")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=None, help="worker processes, overrides the config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="config file used by the theorem1 suite")
    p.add_argument("--trials", type=int, default=100, help="random cases (pseudometric, orthonormal)")
    p.add_argument("--d", type=int, default=8, help="dimension (pseudometric, orthonormal)")
    p.add_argument("--k", type=int, default=12, help="latent dimension (orthonormal)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check-gradients", help="analytic vs finite-difference gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100)
    p.set_defaults(func=cmd_check_gradients)

    p = sub.add_parser("demo", help="run a figure preset")
    p.add_argument("--figure", choices=sorted(PRESETS), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trials", type=int, default=None, help="override the number of trials")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None, out=None, err=None):
    """
    Entry point of ``python -m lingan``. Returns the exit code.
    """
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", stream=err)
    try:
        return args.func(args, out=out, err=err)
    except ConfigError as e:
        err.write("config error: %s\n" % e)
        return EXIT_CONFIG
    except TrialFailure as e:
        err.write("%s\n" % e)
        return EXIT_RUNTIME
    except (LinganError, OSError, ArithmeticError, ValueError) as e:
        err.write("error: %s\n" % e)
        return EXIT_RUNTIME
