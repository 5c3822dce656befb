import collections
import concurrent.futures
import csv
import dataclasses
import itertools
import logging
import math

import torch

from .errors import InvalidInput, LinganError, TrialFailure
from .linalg import DTYPE, random_orthonormal_cols
from .Gaussian import Gaussian, CoordinateSet
from .metrics import w2, w2_squared, gaussian_kl, pseudo_w2, pseudo_w2_zero_padded, norm_concentration
from .DataModel import AUTO, PSEUDO, DataModel, Partition, build_model, sample, make_pseudo_partition, \
    make_supervised_partition, first_coordinates, random_coordinates
from .losses import LossSpec, loss_value, PCA_PROJ, SUPERVISED_LOSS, PS_PLAIN, PS_REGULARIZED, PS_WEIGHTED, PS_PINV
from .trainers import pca_fit, pca_generator, gd_train
from .Config import ExperimentConfig, PCA, EXPERIMENT_VARIANTS, W2, W2_SQUARED, CLEAN, NOISY, SUBSAMPLE_RANDOM, \
    DEFAULT_ALPHA

__all__ = ['STREAM_MODEL', 'STREAM_DATA', 'STREAM_INIT', 'STREAM_PSEUDO', 'CSV_HEADER', 'PANEL_METRICS',
           'SweepRecord', 'TrialOutcome', 'VerificationReport', 'stream_generator', 'test_error',
           'run_trial', 'run_sweep', 'aggregate', 'null_estimator_errors',
           'verify_theorem1', 'verify_orthonormal_invariance', 'verify_pseudometric', 'verify_concentration',
           'write_csv', 'read_csv', 'write_panel_csv', 'PRESETS', 'preset_config']

logger = logging.getLogger(__name__)

##### Constants #######
## independent random streams of one trial
STREAM_MODEL = 0
STREAM_DATA = 1
STREAM_INIT = 2
STREAM_PSEUDO = 3
N_STREAMS = 4

THEOREM1_TOL = 1e-9
INVARIANCE_TOL = 1e-10
PSEUDOMETRIC_TOL = 1e-8

CSV_HEADER = ('variant', 'k', 'n_ps', 'trials', 'test_mean', 'test_std', 'train_mean', 'train_std',
              'iters_mean', 'iters_std')
PANEL_METRICS = ('test', 'train', 'iters')
#######################


@dataclasses.dataclass(frozen=True)
class SweepRecord:
    """
    Aggregate of all the trials at one (variant, k, n_ps) point. Standard deviations are
    population (divide by trials) deviations.
    """
    variant: str
    k: int
    n_ps: int
    trials: int
    test_mean: float
    test_std: float
    train_mean: float
    train_std: float
    iters_mean: float
    iters_std: float


TrialOutcome = collections.namedtuple('TrialOutcome', ['test_error', 'train_error', 'iterations', 'stop_reason'])


@dataclasses.dataclass
class VerificationReport:
    """
    Result of one verification suite.

    Attributes:
        name:
            suite name.

        passed:
            bool, True iff every assertion of the suite holds.

        max_deviation:
            the largest deviation that was compared against the tolerance.

        lines:
            human readable details, one per line.

    """
    name: str
    passed: bool
    max_deviation: float
    lines: list = dataclasses.field(default_factory=list)

    def __str__(self):
        head = "[%s] %s  max deviation %.3e" % ("PASS" if self.passed else "FAIL", self.name, self.max_deviation)
        return "\n".join([head] + ["  " + l for l in self.lines])


def stream_generator(seed, stream):
    """
    A torch.Generator for one of the random streams (STREAM_*) of the trial with the given seed.
    """
    g = torch.Generator()
    g.manual_seed(seed * N_STREAMS + stream)
    return g


def test_error(G, model, convention=W2, target=CLEAN):
    """
    Distance between the generated distribution :math:`\\mathcal{N}(0, GG^T)` and the target.

    Args:
        G:
            d x k generator.

        model:
            DataModel.

        convention:
            W2 or W2_SQUARED.

        target:
            CLEAN, :math:`\\mathcal{N}(0, \\Gamma\\Gamma^T)`, or NOISY, :math:`\\mathcal{N}(0, \\Gamma\\Gamma^T + \\sigma^2 I)`.

    Return:
        python float, >= 0

    """
    if not isinstance(model, DataModel):
        raise InvalidInput("test_error", "[ERROR] model should be a DataModel")
    if convention not in (W2, W2_SQUARED):
        raise InvalidInput("test_error", "[ERROR] convention must be %s or %s, got %s" % (W2, W2_SQUARED, convention))
    if target not in (CLEAN, NOISY):
        raise InvalidInput("test_error", "[ERROR] target must be %s or %s, got %s" % (CLEAN, NOISY, target))
    gen = Gaussian.from_generator(G)
    if gen.dim != model.d:
        raise InvalidInput("test_error", "[ERROR] G has %d rows, model dimension is %d" % (gen.dim, model.d))

    ref = model.true_distribution() if target == CLEAN else model.noisy_distribution()
    if convention == W2:
        return w2(gen, ref)
    return w2_squared(gen, ref)


## trials

def _trial_seed(config, trial_index):
    return config.base_seed + trial_index


def _trial_setup(config, trial_index):
    seed = _trial_seed(config, trial_index)
    model = build_model(config.d, config.m, config.sigma, kind=config.gamma_kind,
                        rng=stream_generator(seed, STREAM_MODEL))
    data = sample(model, config.n, rng=stream_generator(seed, STREAM_DATA))
    return model, data


def _loss_spec(config, variant):
    if variant == PS_WEIGHTED:
        return LossSpec(variant, DEFAULT_ALPHA if config.alpha is None else config.alpha)
    return LossSpec(variant)


def _unsupervised(data, k):
    return Partition(data.x[:, :0], torch.zeros(k, 0, dtype=DTYPE), data.x, kind=PSEUDO)


def _run_point(config, variant, model, data, k, n_ps, trial_index):
    seed = _trial_seed(config, trial_index)

    if variant == PCA:
        G = pca_generator(data.x, k)
        part = _unsupervised(data, k)
        train = loss_value(LossSpec(PCA_PROJ), pca_fit(data.x, k).components, part)
        return TrialOutcome(test_error(G, model, config.test_convention, config.test_target), train, 0, 'closed_form')

    if variant == SUPERVISED_LOSS:
        if config.subsample == SUBSAMPLE_RANDOM:
            subset = random_coordinates(model.m, k, rng=stream_generator(seed, STREAM_PSEUDO))
        else:
            subset = first_coordinates(k)
        part = make_supervised_partition(data, n_ps, subset)
    elif variant == PCA_PROJ:
        part = _unsupervised(data, k)
    else:
        ## same stream for every n_ps: the pairs of a smaller n_ps are a prefix of a larger one.
        part = make_pseudo_partition(data, n_ps, k, rng=stream_generator(seed, STREAM_PSEUDO))

    res = gd_train(_loss_spec(config, variant), part, k, opts=config.gd, rng=stream_generator(seed, STREAM_INIT))
    err = test_error(res.G, model, config.test_convention, config.test_target)
    return TrialOutcome(err, res.final_train_loss, res.iterations, res.stop_reason)


def run_trial(config, variant, k, n_ps, trial_index):
    """
    One trial at one sweep point. The trial seed is base_seed + trial_index; the model, the data,
    the initial G and the pseudo latents each come from their own stream of that seed, so the
    dataset of a trial is the same for every k and n_ps.

    Args:
        config:
            ExperimentConfig.

        variant:
            one of EXPERIMENT_VARIANTS, None for config.variant.

        k:
            latent dimension of the generator.

        n_ps:
            number of (pseudo-)supervised pairs, ignored by the PCA variants.

        trial_index:
            int >= 0.

    Return:
        TrialOutcome(test_error, train_error, iterations, stop_reason)

    Example:

        >>> cfg = lingan.ExperimentConfig(variant='pca', trials=1)
        >>> out = lingan.run_trial(cfg, None, 20, 0, 0)
        >>> print(out.train_error < 1e-9)
        True

    """
    if not isinstance(config, ExperimentConfig):
        raise InvalidInput("run_trial", "[ERROR] config should be an ExperimentConfig")
    variant = config.variant if variant is None else variant
    if variant not in EXPERIMENT_VARIANTS:
        raise InvalidInput("run_trial", "[ERROR] variant must be one of %s, got %s" % (EXPERIMENT_VARIANTS, variant))
    if trial_index < 0:
        raise InvalidInput("run_trial", "[ERROR] trial_index must be >= 0, got %d" % trial_index)
    model, data = _trial_setup(config, trial_index)
    return _run_point(config, variant, model, data, k, n_ps, trial_index)


def _sweep_job(config, trial_index):
    ## one trial over the whole (k, n_ps) grid; runs inside a worker process.
    k, n_ps = None, None
    try:
        model, data = _trial_setup(config, trial_index)
        out = []
        for n_ps in config.n_ps_list:
            for k in config.k_grid:
                out.append((k, n_ps, _run_point(config, config.variant, model, data, k, n_ps, trial_index)))
        return trial_index, out
    except (LinganError, ArithmeticError, RuntimeError, ValueError) as err:
        raise TrialFailure(config.variant, -1 if k is None else k, -1 if n_ps is None else n_ps,
                           trial_index, "%s: %s" % (type(err).__name__, err))


def _init_worker():
    torch.set_num_threads(1)


def _mean_std(values):
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def aggregate(variant, results):
    """
    Reduce per-trial outcomes into SweepRecords.

    Args:
        variant:
            variant name written into the records.

        results:
            dict {(k, n_ps): list of TrialOutcome}.

    Return:
        list of SweepRecord sorted by (n_ps, k). Sums are exactly rounded (math.fsum), so the
        order of the outcomes does not change the result.

    """
    records = []
    for (k, n_ps) in sorted(results, key=lambda p: (p[1], p[0])):
        outs = results[(k, n_ps)]
        if len(outs) == 0:
            raise InvalidInput("aggregate", "[ERROR] no trials at k=%d n_ps=%d" % (k, n_ps))
        tm, ts = _mean_std([o.test_error for o in outs])
        rm, rs = _mean_std([o.train_error for o in outs])
        im, istd = _mean_std([float(o.iterations) for o in outs])
        records.append(SweepRecord(variant, k, n_ps, len(outs), tm, ts, rm, rs, im, istd))
    return records


def run_sweep(config, workers=None):
    """
    Run every trial of the cross product k_grid x n_ps_list x trials and aggregate.

    Trials are independent; with workers > 1 they are spread over a process pool. The output
    does not depend on the number of workers.

    Args:
        config:
            ExperimentConfig.

        workers:
            number of worker processes, config.workers if None.

    Return:
        list of SweepRecord sorted by (variant, n_ps, k), len(k_grid)*len(n_ps_list) records.

    Raises:
        TrialFailure on the first failing trial, with its coordinates.

    """
    if not isinstance(config, ExperimentConfig):
        raise InvalidInput("run_sweep", "[ERROR] config should be an ExperimentConfig")
    workers = config.workers if workers is None else workers
    if workers < 1:
        raise InvalidInput("run_sweep", "[ERROR] workers must be >= 1, got %d" % workers)

    logger.info("sweep %s: %d k x %d n_ps x %d trials on %d worker(s)", config.variant, len(config.k_grid),
                len(config.n_ps_list), config.trials, workers)

    per_trial = {}
    if workers == 1:
        for t in range(config.trials):
            idx, out = _sweep_job(config, t)
            per_trial[idx] = out
            logger.info("trial %d/%d done", t + 1, config.trials)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as executor:
            futures = [executor.submit(_sweep_job, config, t) for t in range(config.trials)]
            try:
                for i, future in enumerate(concurrent.futures.as_completed(futures)):
                    idx, out = future.result()
                    per_trial[idx] = out
                    logger.info("trial %d done (%d/%d)", idx, i + 1, config.trials)
            except BaseException:
                for f in futures:
                    f.cancel()
                raise

    results = collections.defaultdict(list)
    for t in sorted(per_trial):
        for k, n_ps, outcome in per_trial[t]:
            results[(k, n_ps)].append(outcome)

    records = aggregate(config.variant, results)
    logger.info("sweep %s finished: %d records", config.variant, len(records))
    return records


## verification suites

def null_estimator_errors(config):
    """
    Test error of the null estimator G = 0 under the four (convention, target) combinations.

    Return:
        dict {(convention, target): float}

    """
    model, _ = _trial_setup(config, 0)
    G = torch.zeros(model.d, 1, dtype=DTYPE)
    return {(c, t): test_error(G, model, c, t) for c in (W2, W2_SQUARED) for t in (CLEAN, NOISY)}


def verify_theorem1(config, k_list=None, trial_index=0):
    """
    Check that the PCA generator stops depending on k once k >= n: test errors agree within 1e-9,
    and so do the KL divergences of the noise-padded distributions :math:`\\mathcal{N}(0, GG^T+\\sigma^2 I)`
    against :math:`\\mathcal{N}(0, \\Gamma\\Gamma^T+\\sigma^2 I)` (skipped when :math:`\\sigma = 0`).

    k < n values are reported but do not take part in the assertion.

    Args:
        config:
            ExperimentConfig (d, m, n, sigma, test convention and target are used).

        k_list:
            k values to compare, defaults to (n, d, 2d-1).

        trial_index:
            which trial dataset to use.

    Return:
        VerificationReport

    """
    if k_list is None:
        k_list = (config.n, config.d, 2 * config.d - 1)
    k_list = sorted(set(int(k) for k in k_list))
    model, data = _trial_setup(config, trial_index)

    noise = config.sigma ** 2 * torch.eye(model.d, dtype=DTYPE)
    target = model.true_distribution()
    padded_target = Gaussian(target.mean, target.covariance + noise, check=False)

    lines = []
    errs, kls = {}, {}
    for k in k_list:
        G = pca_generator(data.x, k)
        errs[k] = test_error(G, model, config.test_convention, config.test_target)
        line = "k=%-4d test error %.12g" % (k, errs[k])
        if config.sigma > 0:
            gen = Gaussian.from_generator(G)
            kls[k] = gaussian_kl(Gaussian(gen.mean, gen.covariance + noise, check=False), padded_target)
            line += "  KL %.12g" % kls[k]
        lines.append(line)

    over = [k for k in k_list if k >= config.n]
    dev = 0.
    for a, b in itertools.combinations(over, 2):
        dev = max(dev, abs(errs[a] - errs[b]))
        if kls:
            dev = max(dev, abs(kls[a] - kls[b]))
    dev_all = max(errs.values()) - min(errs.values())
    lines.append("max deviation over k >= n: %.3e; over all k: %.3e" % (dev, dev_all))

    for (c, t), v in sorted(null_estimator_errors(config).items()):
        lines.append("null estimator %s x %s: %.12g" % (c, t, v))

    return VerificationReport("theorem1", dev < THEOREM1_TOL, dev, lines)


def verify_orthonormal_invariance(d, k, seed, draws=100):
    """
    :math:`GU` generates the same distribution as G for any orthonormal k x k U. Checks
    :math:`\\|GG^T - (GU)(GU)^T\\|_F < 10^{-10}` and equal test errors within 1e-10 for U = I,
    U = -I and ``draws`` random U.

    Return:
        VerificationReport

    """
    if d < 1 or k < 1:
        raise InvalidInput("verify_orthonormal_invariance", "[ERROR] need d >= 1 and k >= 1, got d=%d k=%d" % (d, k))
    rng = torch.Generator()
    rng.manual_seed(seed)

    m = min(d, max(1, k // 2))
    model = build_model(d, m, 0.1, kind=AUTO, rng=rng)
    G = torch.randn(d, k, generator=rng, dtype=DTYPE)
    cov = torch.matmul(G, G.T)
    base = test_error(G, model)

    Us = [torch.eye(k, dtype=DTYPE), -torch.eye(k, dtype=DTYPE)]
    Us += [random_orthonormal_cols(k, k, rng) for _ in range(draws)]

    dev = 0.
    for U in Us:
        GU = torch.matmul(G, U)
        dev = max(dev, float(torch.linalg.norm(cov - torch.matmul(GU, GU.T))))
        dev = max(dev, abs(test_error(GU, model) - base))

    lines = ["d=%d k=%d, %d rotations (identity, sign flip, %d random)" % (d, k, len(Us), draws)]
    return VerificationReport("orthonormal", dev < INVARIANCE_TOL, dev, lines)


def _random_gaussian(d, rng):
    A = torch.randn(d, d, generator=rng, dtype=DTYPE)
    cov = torch.matmul(A, A.T) / d
    return Gaussian(torch.randn(d, generator=rng, dtype=DTYPE), 0.5 * (cov + cov.T), check=False)


def verify_pseudometric(d, trials, seed):
    """
    Compute the coordinate-ignoring pseudometric along both paths (marginals and zero padding)
    for random Gaussian pairs and random ignored sets; they must agree within 1e-8. The empty
    set and the set of all coordinates are always included.

    Return:
        VerificationReport

    """
    if d < 1 or trials < 1:
        raise InvalidInput("verify_pseudometric", "[ERROR] need d >= 1 and trials >= 1, got d=%d trials=%d" % (d, trials))
    rng = torch.Generator()
    rng.manual_seed(seed)

    dev = 0.
    for t in range(trials):
        a, b = _random_gaussian(d, rng), _random_gaussian(d, rng)
        if t == 0:
            ignored = CoordinateSet()
        elif t == 1:
            ignored = CoordinateSet.all(d)
        else:
            size = int(torch.randint(0, d + 1, (1,), generator=rng))
            ignored = random_coordinates(d, size, rng)
        dev = max(dev, abs(pseudo_w2(a, b, ignored) - pseudo_w2_zero_padded(a, b, ignored)))
        if t == 0:
            dev = max(dev, abs(pseudo_w2(a, b, ignored) - w2(a, b)))

    lines = ["d=%d, %d random pairs" % (d, trials)]
    return VerificationReport("pseudometric", dev < PSEUDOMETRIC_TOL, dev, lines)


def verify_concentration(m_list=(1, 10, 100, 1000), samples=10000, seed=0):
    """
    Report how :math:`\\|z\\|_2/\\sqrt{m}` concentrates as m grows and check that the spread at the
    largest m is below the spread at the smallest m >= 10.

    Return:
        VerificationReport, max_deviation is the largest |mean_ratio - 1|.

    """
    m_list = sorted(set(int(m) for m in m_list))
    if len(m_list) < 2:
        raise InvalidInput("verify_concentration", "[ERROR] need at least two values of m")
    rng = torch.Generator()
    rng.manual_seed(seed)

    summaries = [norm_concentration(m, samples, rng) for m in m_list]
    lines = ["m=%-6d mean %.6f  std %.6f" % (s.m, s.mean_ratio, s.std_ratio) for s in summaries]

    ref = next((s for s in summaries[:-1] if s.m >= 10), summaries[0])
    passed = summaries[-1].std_ratio < ref.std_ratio
    dev = max(abs(s.mean_ratio - 1.) for s in summaries)
    return VerificationReport("concentration", passed, dev, lines)


## CSV

def write_csv(records, path):
    """
    Write SweepRecords as UTF-8 CSV with LF line endings. Floats use the shortest repr that
    round-trips, so identical records give identical bytes.

    Raises:
        OSError if the file cannot be written.

    """
    with open(path, 'w', encoding='utf-8', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.variant, r.k, r.n_ps, r.trials,
                        repr(r.test_mean), repr(r.test_std), repr(r.train_mean), repr(r.train_std),
                        repr(r.iters_mean), repr(r.iters_std)])


def read_csv(path):
    """
    Read a file written by write_csv().

    Return:
        list of SweepRecord

    """
    with open(path, 'r', encoding='utf-8', newline='') as f:
        rows = list(csv.reader(f))
    if len(rows) == 0 or tuple(rows[0]) != CSV_HEADER:
        raise InvalidInput("read_csv", "[ERROR] %s does not start with the sweep header" % path)
    out = []
    for row in rows[1:]:
        if len(row) != len(CSV_HEADER):
            raise InvalidInput("read_csv", "[ERROR] malformed row %s" % row)
        out.append(SweepRecord(row[0], int(row[1]), int(row[2]), int(row[3]), *[float(x) for x in row[4:]]))
    return out


def write_panel_csv(records, path, metric):
    """
    Write one figure panel: one row per k, and for every n_ps a mean and a std column
    (header ``k,n0,n0_std,n2,n2_std,...``).

    Args:
        records:
            SweepRecords of one variant.

        metric:
            'test', 'train' or 'iters'.

    """
    if metric not in PANEL_METRICS:
        raise InvalidInput("write_panel_csv", "[ERROR] metric must be one of %s, got %s" % (PANEL_METRICS, metric))
    table = {(r.k, r.n_ps): r for r in records}
    ks = sorted(set(r.k for r in records))
    nps = sorted(set(r.n_ps for r in records))

    with open(path, 'w', encoding='utf-8', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        header = ['k']
        for p in nps:
            header += ['n%d' % p, 'n%d_std' % p]
        w.writerow(header)
        for k in ks:
            row = [k]
            for p in nps:
                r = table.get((k, p))
                if r is None:
                    row += ['', '']
                else:
                    row += [repr(getattr(r, metric + '_mean')), repr(getattr(r, metric + '_std'))]
            w.writerow(row)


## presets of the demo figures

_PS_GRID = tuple(range(1, 128, 2))
_N_PS = (0, 2, 4, 12, 18, 20)

PRESETS = {
    'spoon': (dict(variant=PCA, k_grid=tuple(range(1, 41)), n_ps_list=(0,)), ('train', 'test')),
    'supervised': (dict(variant=SUPERVISED_LOSS, d=64, m=40, n=20, k_grid=tuple(range(1, 41)), n_ps_list=_N_PS,
                        allow_any_order=True), ('train', 'test')),
    'ps1': (dict(variant=PS_PLAIN, k_grid=_PS_GRID, n_ps_list=_N_PS), PANEL_METRICS),
    'ps2': (dict(variant=PS_REGULARIZED, k_grid=_PS_GRID, n_ps_list=_N_PS), PANEL_METRICS),
    'ps-pinv': (dict(variant=PS_PINV, k_grid=_PS_GRID, n_ps_list=_N_PS), PANEL_METRICS),
    'ps-weighted': (dict(variant=PS_WEIGHTED, alpha=DEFAULT_ALPHA, k_grid=_PS_GRID, n_ps_list=_N_PS), PANEL_METRICS),
}


def preset_config(name, trials=None, **overrides):
    """
    The ExperimentConfig of a demo figure and the panels it is drawn with.

    Args:
        name:
            one of PRESETS.

        trials:
            overrides the number of trials.

    Return:
        (ExperimentConfig, tuple of panel metrics)

    """
    if name not in PRESETS:
        raise InvalidInput("preset_config", "[ERROR] unknown preset %s, expected one of %s" % (name, sorted(PRESETS)))
    fields, panels = PRESETS[name]
    fields = dict(fields)
    if trials is not None:
        fields['trials'] = trials
    fields.update(overrides)
    return ExperimentConfig(**fields), panels
