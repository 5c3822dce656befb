import torch

from .errors import InvalidInput, DegenerateOperand
from .linalg import DTYPE, as_matrix, pinv
from .DataModel import Partition, PSEUDO, SUPERVISED

__all__ = ['PCA_PROJ', 'SUPERVISED_LOSS', 'PS_PLAIN', 'PS_REGULARIZED', 'PS_WEIGHTED', 'PS_PINV', 'VARIANTS',
           'LossSpec', 'loss_value', 'loss_gradient', 'finite_diff_gradient',
           'entrywise_relative_error', 'random_instance']

##### Constants #######
PCA_PROJ = 'pca_proj'
SUPERVISED_LOSS = 'supervised'
PS_PLAIN = 'ps_plain'
PS_REGULARIZED = 'ps_regularized'
PS_WEIGHTED = 'ps_weighted'
PS_PINV = 'ps_pinv'
VARIANTS = (PCA_PROJ, SUPERVISED_LOSS, PS_PLAIN, PS_REGULARIZED, PS_WEIGHTED, PS_PINV)
#######################


class LossSpec:
    """
    Which training loss to use. With :math:`R(X) = \\|(I_d - GG^T)X\\|_F^2` and :math:`F = \\|GZ^{PS} - X^{PS}\\|_F^2`:

        1. PCA_PROJ        : :math:`\\frac{1}{n} R(X)`
        2. SUPERVISED_LOSS : :math:`\\frac{1}{n_{PS}} F + \\frac{1}{n_{UNSUP}} R(X^{UNSUP})`, Z are true latent subvectors
        3. PS_PLAIN        : same form as 2. with fabricated latents
        4. PS_REGULARIZED  : :math:`\\frac{1}{n_{PS}} F + \\frac{1}{n} R(X)`
        5. PS_WEIGHTED     : :math:`\\frac{\\alpha}{n_{PS}} F + \\frac{1-\\alpha}{n} R(X)`
        6. PS_PINV         : :math:`\\frac{1}{n_{PS}} F + \\frac{1}{n} \\|(I_d - GG^+)X\\|_F^2`

    A term whose sample count is zero is dropped.

    Args:
        variant:
            one of VARIANTS.

        alpha:
            float in [0,1], required for PS_WEIGHTED and only for it.

    """
    def __init__(self, variant, alpha=None):
        if variant not in VARIANTS:
            raise InvalidInput("LossSpec", "[ERROR] variant must be one of %s, got %s" % (VARIANTS, variant))
        if variant == PS_WEIGHTED:
            if alpha is None:
                raise InvalidInput("LossSpec", "[ERROR] ps_weighted requires alpha")
            if not 0. <= alpha <= 1.:
                raise InvalidInput("LossSpec", "[ERROR] alpha must lie in [0,1], got %s" % alpha)
            alpha = float(alpha)
        elif alpha is not None:
            raise InvalidInput("LossSpec", "[ERROR] alpha is only used by ps_weighted")
        self.variant = variant
        self.alpha = alpha

    def __eq__(self, rhs):
        return isinstance(rhs, LossSpec) and self.variant == rhs.variant and self.alpha == rhs.alpha

    def __repr__(self):
        if self.alpha is None:
            return "LossSpec(%s)" % self.variant
        return "LossSpec(%s, alpha=%g)" % (self.variant, self.alpha)


def _check(spec, G, part, where):
    if not isinstance(spec, LossSpec):
        raise InvalidInput(where, "[ERROR] spec should be a LossSpec")
    if not isinstance(part, Partition):
        raise InvalidInput(where, "[ERROR] part should be a Partition")
    G = as_matrix(G, where)
    if G.shape[0] != part.d:
        raise InvalidInput(where, "[ERROR] G has %d rows, data dimension is %d" % (G.shape[0], part.d))
    if part.n_ps > 0 and spec.variant != PCA_PROJ and part.k != G.shape[1]:
        raise InvalidInput(where, "[ERROR] G has %d columns, latents have dimension %d" % (G.shape[1], part.k))
    if part.n == 0:
        raise InvalidInput(where, "[ERROR] no loss is defined with n_ps = 0 and n_unsup = 0")
    if spec.variant == PS_PINV and not bool(torch.any(G != 0)):
        raise DegenerateOperand(where, "[ERROR] ps_pinv is undefined at the all-zero G")
    return G


## Each term returns (value, gradient); the gradient is only built when asked for.

def _fit_term(G, z, x, grad):
    r = torch.matmul(G, z) - x
    v = float(torch.sum(r * r))
    return v, (2. * torch.matmul(r, z.T) if grad else None)


def _proj_term(G, x, grad):
    ## ||(I - G G^T) X||_F^2
    gtx = torch.matmul(G.T, x)
    r = x - torch.matmul(G, gtx)
    v = float(torch.sum(r * r))
    if not grad:
        return v, None
    ## B = X X^T, -4 B G + 2 B G G^T G + 2 G G^T B G
    bg = torch.matmul(x, gtx.T)
    gtg = torch.matmul(G.T, G)
    g = -4. * bg + 2. * torch.matmul(bg, gtg) + 2. * torch.matmul(G, torch.matmul(G.T, bg))
    return v, g


def _pinv_term(G, x, grad):
    ## ||(I - G G^+) X||_F^2 ; gradient -2 (I - G G^+) X X^T (G^+)^T
    w = torch.matmul(pinv(G), x)
    r = x - torch.matmul(G, w)
    v = float(torch.sum(r * r))
    return v, (-2. * torch.matmul(r, w.T) if grad else None)


def _evaluate(spec, G, part, grad):
    v = 0.
    g = torch.zeros_like(G) if grad else None

    def add(weight, term):
        nonlocal v, g
        tv, tg = term
        v += weight * tv
        if grad:
            g = g + weight * tg

    var = spec.variant
    n, n_ps, n_u = part.n, part.n_ps, part.n_unsup

    if var == PCA_PROJ:
        add(1. / n, _proj_term(G, part.x, grad))

    elif var in (SUPERVISED_LOSS, PS_PLAIN):
        if n_ps > 0:
            add(1. / n_ps, _fit_term(G, part.z_ps, part.x_ps, grad))
        if n_u > 0:
            add(1. / n_u, _proj_term(G, part.x_unsup, grad))

    elif var == PS_REGULARIZED:
        if n_ps > 0:
            add(1. / n_ps, _fit_term(G, part.z_ps, part.x_ps, grad))
        add(1. / n, _proj_term(G, part.x, grad))

    elif var == PS_WEIGHTED:
        a = spec.alpha
        if n_ps > 0:
            add(a / n_ps, _fit_term(G, part.z_ps, part.x_ps, grad))
        add((1. - a) / n, _proj_term(G, part.x, grad))

    elif var == PS_PINV:
        if n_ps > 0:
            add(1. / n_ps, _fit_term(G, part.z_ps, part.x_ps, grad))
        add(1. / n, _pinv_term(G, part.x, grad))

    return v, g


def loss_value(spec, G, part):
    """
    Evaluate the training loss selected by spec.

    Args:
        spec:
            LossSpec

        G:
            d x k generator matrix.

        part:
            Partition, z_ps must be k x n_ps.

    Return:
        python float, >= 0

    Example:
    ::
        part = lingan.make_pseudo_partition(data, n_ps=20, k=30, rng=g)

    >>> lingan.loss_value(lingan.LossSpec(lingan.PS_PLAIN), G, part)

    """
    G = _check(spec, G, part, "loss_value")
    return _evaluate(spec, G, part, False)[0]


def loss_gradient(spec, G, part):
    """
    Analytic gradient of loss_value() with respect to G. The term-dropping and normalization
    conventions are the same as in loss_value().

    For PS_PINV the projection term uses the rank-agnostic form

        :math:`-\\frac{2}{n}(I_d - GG^+)XX^T(G^+)^T`

    which equals :math:`\\frac{2}{n}G(G^TG)^{-1}G^TXX^TG(G^TG)^{-1} - \\frac{2}{n}XX^TG(G^TG)^{-1}` when
    G has full column rank.

    Return:
        torch.Tensor, d x k

    """
    G = _check(spec, G, part, "loss_gradient")
    return _evaluate(spec, G, part, True)[1]


def finite_diff_gradient(spec, G, part, h=1e-5):
    """
    Central finite-difference estimate of the gradient, entry by entry

        :math:`\\frac{L(G + hE_{ij}) - L(G - hE_{ij})}{2h}`

    Args:
        h:
            step, > 0.

    Return:
        torch.Tensor, d x k

    """
    if not h > 0:
        raise InvalidInput("finite_diff_gradient", "[ERROR] h must be > 0, got %s" % h)
    G = _check(spec, G, part, "finite_diff_gradient").clone()

    out = torch.zeros_like(G)
    for i in range(G.shape[0]):
        for j in range(G.shape[1]):
            old = float(G[i, j])
            G[i, j] = old + h
            fp = _evaluate(spec, G, part, False)[0]
            G[i, j] = old - h
            fm = _evaluate(spec, G, part, False)[0]
            G[i, j] = old
            out[i, j] = (fp - fm) / (2. * h)
    return out


def entrywise_relative_error(analytic, numeric, rel_floor=1e-4, abs_floor=1e-6):
    """
    Entrywise relative deviation between two gradients

        :math:`|a_{ij} - f_{ij}| / \\max(|a_{ij}|, |f_{ij}|, \\text{rel\\_floor}\\cdot s, \\text{abs\\_floor})`

    where s is the largest entry magnitude of either gradient. The floors keep entries that are
    zero up to roundoff from dominating the statistic.

    Return:
        (max, median) as python floats.

    """
    a = as_matrix(analytic, "entrywise_relative_error")
    f = as_matrix(numeric, "entrywise_relative_error")
    if a.shape != f.shape:
        raise InvalidInput("entrywise_relative_error", "[ERROR] shape mismatch %s vs %s" % (tuple(a.shape), tuple(f.shape)))
    if a.numel() == 0:
        return 0., 0.

    scale = max(float(torch.max(torch.abs(a))), float(torch.max(torch.abs(f))))
    floor = max(rel_floor * scale, abs_floor)
    den = torch.clamp(torch.maximum(torch.abs(a), torch.abs(f)), min=floor)
    err = torch.abs(a - f) / den
    return float(torch.max(err)), float(torch.median(err))


def random_instance(variant, d, k, n, n_ps=None, rng=None, alpha=0.5):
    """
    A random (spec, G, partition) triple for gradient checks. Data, latents and G are standard
    Gaussian (G scaled by :math:`1/\\sqrt{d}`).

    Args:
        variant:
            one of VARIANTS.

        d, k, n:
            dimensions.

        n_ps:
            number of pairs. If None it is drawn uniformly from {0..n}.

        rng:
            torch.Generator.

        alpha:
            weight used when variant is PS_WEIGHTED.

    Return:
        (LossSpec, G, Partition)

    """
    if n_ps is None:
        n_ps = int(torch.randint(0, n + 1, (1,), generator=rng))
    if n_ps < 0 or n_ps > n:
        raise InvalidInput("random_instance", "[ERROR] need 0 <= n_ps <= n, got %d" % n_ps)

    spec = LossSpec(variant, alpha if variant == PS_WEIGHTED else None)
    x = torch.randn(d, n, generator=rng, dtype=DTYPE)
    z = torch.randn(k, n_ps, generator=rng, dtype=DTYPE)
    G = torch.randn(d, k, generator=rng, dtype=DTYPE) / d ** 0.5
    kind = SUPERVISED if variant == SUPERVISED_LOSS else PSEUDO
    return spec, G, Partition(x[:, :n_ps], z, x[:, n_ps:], kind=kind)
