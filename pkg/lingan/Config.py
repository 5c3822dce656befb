import dataclasses
import logging
import os
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError, InvalidInput
from .linalg import is_power_of_two
from .DataModel import GammaKinds, HADAMARD
from .losses import VARIANTS, PS_WEIGHTED, SUPERVISED_LOSS
from .trainers import GDOptions, STEP_RUNNING, STEP_FIXED

__all__ = ['PCA', 'EXPERIMENT_VARIANTS', 'W2', 'W2_SQUARED', 'CLEAN', 'NOISY', 'SUBSAMPLE_FIRST', 'SUBSAMPLE_RANDOM',
           'DEFAULT_ALPHA', 'CONFIG_KEYS', 'ExperimentConfig', 'default_k_grid',
           'config_from_dict', 'parse_config_text', 'load_config', 'format_config', 'apply_env']

logger = logging.getLogger(__name__)

##### Constants #######
## closed-form PCA baseline, the only experiment variant that is not trained by gradient descent.
PCA = 'pca'
EXPERIMENT_VARIANTS = (PCA,) + VARIANTS

W2 = 'w2'
W2_SQUARED = 'w2_squared'
CLEAN = 'clean'
NOISY = 'noisy'

SUBSAMPLE_FIRST = 'first'
SUBSAMPLE_RANDOM = 'random'

DEFAULT_ALPHA = 0.98
DEFAULT_N_PS = (0, 2, 4, 12, 18, 20)

_GD_KEYS = ('max_iters', 'init_std', 'step_init', 'grad_stop', 'move_tol', 'stall_limit', 'step_mode', 'accept_increase')

CONFIG_KEYS = ('d', 'm', 'n', 'sigma', 'gamma_kind', 'trials', 'base_seed', 'k_grid', 'n_ps_list', 'variant', 'alpha',
               'test_convention', 'test_target') + _GD_KEYS + ('workers', 'allow_any_order', 'subsample')
#######################


def default_k_grid(variant, m=40):
    """
    The k grid used when a config does not give one: 1..min(40, m) for the supervised variant,
    the odd values 1,3,...,127 otherwise.
    """
    if variant == SUPERVISED_LOSS:
        return tuple(range(1, min(40, m) + 1))
    return tuple(range(1, 128, 2))


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything a sweep needs. Unset fields resolve to their defaults when the object is built:
    k_grid follows the variant (see default_k_grid()), alpha is 0.98 for ps_weighted.

    Validation errors are raised as ConfigError carrying the offending key. The ordering
    m < n < d is required unless allow_any_order is set, in which case a violation is logged
    as a warning.

    Example:

        >>> cfg = lingan.ExperimentConfig(variant='ps_pinv', trials=10)
        >>> print(len(cfg.k_grid))
        64

    """
    d: int = 64
    m: int = 10
    n: int = 20
    sigma: float = 0.15
    gamma_kind: str = HADAMARD
    trials: int = 200
    base_seed: int = 0
    k_grid: Optional[Tuple[int, ...]] = None
    n_ps_list: Tuple[int, ...] = DEFAULT_N_PS
    variant: str = 'ps_plain'
    alpha: Optional[float] = None
    test_convention: str = W2
    test_target: str = CLEAN
    gd: GDOptions = dataclasses.field(default_factory=GDOptions)
    workers: int = 1
    allow_any_order: bool = False
    subsample: str = SUBSAMPLE_FIRST

    def __post_init__(self):
        setf = lambda k, v: object.__setattr__(self, k, v)

        if self.variant not in EXPERIMENT_VARIANTS:
            raise ConfigError('variant', "must be one of %s, got %s" % (", ".join(EXPERIMENT_VARIANTS), self.variant))

        for key in ('d', 'm', 'n', 'trials', 'workers'):
            if int(getattr(self, key)) < 1:
                raise ConfigError(key, "must be >= 1, got %s" % getattr(self, key))
        if self.base_seed < 0:
            raise ConfigError('base_seed', "must be >= 0, got %s" % self.base_seed)
        if self.sigma < 0:
            raise ConfigError('sigma', "must be >= 0, got %s" % self.sigma)

        if self.gamma_kind not in GammaKinds:
            raise ConfigError('gamma_kind', "must be one of %s, got %s" % (", ".join(GammaKinds), self.gamma_kind))
        if self.gamma_kind == HADAMARD and not is_power_of_two(self.d):
            raise ConfigError('gamma_kind', "hadamard requires d to be a power of 2, got d=%d" % self.d)

        if self.m > self.d:
            raise ConfigError('m', "must be <= d, got m=%d d=%d" % (self.m, self.d))
        if not (self.m < self.n < self.d):
            if not self.allow_any_order:
                raise ConfigError('m', "expected m < n < d, got m=%d n=%d d=%d (set allow_any_order to override)"
                                  % (self.m, self.n, self.d))
            logger.warning("dimensions m=%d n=%d d=%d violate m < n < d", self.m, self.n, self.d)

        k_grid = default_k_grid(self.variant, self.m) if self.k_grid is None else tuple(int(k) for k in self.k_grid)
        if len(k_grid) == 0 or any(k < 1 for k in k_grid):
            raise ConfigError('k_grid', "must be a non-empty list of positive integers")
        if len(set(k_grid)) != len(k_grid):
            raise ConfigError('k_grid', "contains duplicates")
        if self.variant == SUPERVISED_LOSS and max(k_grid) > self.m:
            raise ConfigError('k_grid', "supervised latents are subvectors of z, need k <= m=%d" % self.m)
        setf('k_grid', tuple(sorted(k_grid)))

        n_ps_list = tuple(int(x) for x in self.n_ps_list)
        if len(n_ps_list) == 0:
            raise ConfigError('n_ps_list', "must not be empty")
        if len(set(n_ps_list)) != len(n_ps_list):
            raise ConfigError('n_ps_list', "contains duplicates")
        for x in n_ps_list:
            if x < 0 or x > self.n:
                raise ConfigError('n_ps_list', "entries must lie in [0, n=%d], got %d" % (self.n, x))
        setf('n_ps_list', tuple(sorted(n_ps_list)))

        if self.variant == PS_WEIGHTED:
            alpha = DEFAULT_ALPHA if self.alpha is None else float(self.alpha)
            if not 0. <= alpha <= 1.:
                raise ConfigError('alpha', "must lie in [0,1], got %s" % alpha)
            setf('alpha', alpha)
        elif self.alpha is not None:
            raise ConfigError('alpha', "is only used by ps_weighted")

        if self.test_convention not in (W2, W2_SQUARED):
            raise ConfigError('test_convention', "must be %s or %s, got %s" % (W2, W2_SQUARED, self.test_convention))
        if self.test_target not in (CLEAN, NOISY):
            raise ConfigError('test_target', "must be %s or %s, got %s" % (CLEAN, NOISY, self.test_target))
        if self.subsample not in (SUBSAMPLE_FIRST, SUBSAMPLE_RANDOM):
            raise ConfigError('subsample', "must be %s or %s, got %s" % (SUBSAMPLE_FIRST, SUBSAMPLE_RANDOM, self.subsample))
        if not isinstance(self.gd, GDOptions):
            raise ConfigError('gd', "should be a GDOptions")


## Parsing

def _parse_int(key, s):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(key, "expected an integer, got '%s'" % s)


def _parse_float(key, s):
    ## float() never looks at the locale, '.' is always the decimal separator.
    try:
        v = float(s)
    except ValueError:
        raise ConfigError(key, "expected a number, got '%s'" % s)
    if not np.isfinite(v):
        raise ConfigError(key, "expected a finite number, got '%s'" % s)
    return v


def _parse_bool(key, s):
    low = s.lower()
    if low in ('true', 'yes', '1', 'on'):
        return True
    if low in ('false', 'no', '0', 'off'):
        return False
    raise ConfigError(key, "expected true or false, got '%s'" % s)


def _parse_int_list(key, s):
    """
    Comma list ``1,2,5`` or inclusive range ``start:step:end``.
    """
    s = s.strip()
    if ':' in s:
        parts = s.split(':')
        if len(parts) != 3:
            raise ConfigError(key, "range must read start:step:end, got '%s'" % s)
        start, step, end = [_parse_int(key, p.strip()) for p in parts]
        if step < 1:
            raise ConfigError(key, "range step must be >= 1, got %d" % step)
        if end < start:
            raise ConfigError(key, "range end %d is below start %d" % (end, start))
        return tuple(int(x) for x in np.arange(start, end + 1, step))
    items = [p.strip() for p in s.split(',')]
    if any(p == '' for p in items):
        raise ConfigError(key, "empty entry in list '%s'" % s)
    return tuple(_parse_int(key, p) for p in items)


_INT_KEYS = ('d', 'm', 'n', 'trials', 'base_seed', 'max_iters', 'stall_limit', 'workers')
_FLOAT_KEYS = ('sigma', 'alpha', 'init_std', 'step_init', 'grad_stop', 'move_tol')
_BOOL_KEYS = ('accept_increase', 'allow_any_order')
_LIST_KEYS = ('k_grid', 'n_ps_list')


def _convert(key, raw):
    if key in _INT_KEYS:
        return _parse_int(key, raw)
    if key in _FLOAT_KEYS:
        return _parse_float(key, raw)
    if key in _BOOL_KEYS:
        return _parse_bool(key, raw)
    if key in _LIST_KEYS:
        return _parse_int_list(key, raw)
    return raw


def _build_gd(values):
    opts = {}
    for key in _GD_KEYS:
        if key not in values:
            continue
        v = values[key]
        if key == 'step_mode':
            if v not in (STEP_RUNNING, STEP_FIXED):
                raise ConfigError(key, "must be %s or %s, got %s" % (STEP_RUNNING, STEP_FIXED, v))
        elif key != 'accept_increase' and not v > 0:
            raise ConfigError(key, "must be positive, got %s" % v)
        opts[key] = v
    try:
        return GDOptions(**opts)
    except InvalidInput as err:
        raise ConfigError('gd', str(err))


def config_from_dict(values):
    """
    Build an ExperimentConfig from already converted key/value pairs, keys as in CONFIG_KEYS.
    """
    for key in values:
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
    gd = _build_gd(values)
    kwargs = {k: v for k, v in values.items() if k not in _GD_KEYS}
    return ExperimentConfig(gd=gd, **kwargs)


def parse_config_text(text, source="<string>"):
    """
    Parse a config file. One ``key = value`` per line; blank lines and ``#`` comments are
    ignored, keys missing from the file take the defaults of ExperimentConfig.

    Args:
        text:
            the content of the file.

        source:
            name used in diagnostics.

    Return:
        ExperimentConfig

    Example:
    ::
        d = 64
        variant = ps_pinv
        k_grid = 1:2:127
        n_ps_list = 0,20

    """
    values = {}
    for i, line in enumerate(text.splitlines()):
        line = line.split('#', 1)[0].strip()
        if line == '':
            continue
        tmp = line.split('=')
        if len(tmp) != 2:
            raise ConfigError("%s:%d" % (source, i + 1), "expected 'key = value', got '%s'" % line)
        key, raw = tmp[0].strip(), tmp[1].strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key (%s:%d)" % (source, i + 1))
        if key in values:
            raise ConfigError(key, "given more than once (%s:%d)" % (source, i + 1))
        if raw == '':
            raise ConfigError(key, "missing value (%s:%d)" % (source, i + 1))
        values[key] = _convert(key, raw)
    return config_from_dict(values)


def apply_env(cfg, environ=None):
    """
    Apply the WORKERS environment override to cfg.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get('WORKERS')
    if raw is None or raw.strip() == '':
        return cfg
    return dataclasses.replace(cfg, workers=_parse_int('workers', raw.strip()))


def load_config(path, environ=None):
    """
    Read and parse a config file, then apply the environment overrides (see apply_env()).

    Args:
        path:
            config file path.

    Return:
        ExperimentConfig

    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as err:
        raise ConfigError('config', "cannot read %s: %s" % (path, err.strerror or err))
    return apply_env(parse_config_text(text, source=str(path)), environ)


def _fmt(v):
    if isinstance(v, bool):
        return 'true' if v else 'false'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def format_config(cfg):
    """
    Render a config with every default expanded, in the format read by parse_config_text().
    parse_config_text(format_config(cfg)) == cfg.
    """
    lines = []
    for key in CONFIG_KEYS:
        if key in _GD_KEYS:
            v = getattr(cfg.gd, key)
        else:
            v = getattr(cfg, key)
        if v is None:
            continue
        lines.append("%s = %s" % (key, _fmt(v)))
    return "\n".join(lines) + "\n"
