import collections
import dataclasses
import logging
from typing import Optional, Tuple

import torch

from .errors import InvalidInput
from .linalg import DTYPE, as_matrix
from .losses import LossSpec, loss_value, loss_gradient

__all__ = ['STOP_MAX_ITERS', 'STOP_GRAD_SMALL', 'STOP_STALLED', 'STEP_RUNNING', 'STEP_FIXED',
           'DEFAULT_MULTIPLIERS', 'GDOptions', 'TrainResult', 'PCAFit', 'pca_fit', 'pca_generator', 'gd_train']

logger = logging.getLogger(__name__)

##### Constants #######
STOP_MAX_ITERS = 'max_iters'
STOP_GRAD_SMALL = 'grad_small'
STOP_STALLED = 'stalled'

STEP_RUNNING = 'running'
STEP_FIXED = 'fixed'

DEFAULT_MULTIPLIERS = (1e-7, 5e-6, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1., 10., 100.)
#######################


@dataclasses.dataclass(frozen=True)
class GDOptions:
    """
    Options of the adaptive step-size gradient descent.

    Attributes:
        max_iters:
            maximum number of iterations.

        init_std:
            standard deviation of the i.i.d. Gaussian initial G.

        step_init:
            initial step size.

        step_multipliers:
            candidates tried at every iteration; the one with the lowest training loss wins,
            ties go to the earliest in the list.

        grad_stop:
            stop when the Frobenius norm of the gradient falls below it.

        move_tol, stall_limit:
            stop when G moves less than move_tol (Frobenius) for more than stall_limit
            consecutive iterations.

        step_mode:
            STEP_RUNNING (step <- step * chosen multiplier) or STEP_FIXED (step_init * multiplier every iteration).

        accept_increase:
            if False, a best candidate that increases the loss is rejected and G stays put.

        record_trace:
            keep the adopted loss of every iteration in TrainResult.loss_trace.

    """
    max_iters: int = 500
    init_std: float = 0.03
    step_init: float = 1e-4
    step_multipliers: Tuple[float, ...] = DEFAULT_MULTIPLIERS
    grad_stop: float = 0.05
    move_tol: float = 1e-5
    stall_limit: int = 5
    step_mode: str = STEP_RUNNING
    accept_increase: bool = False
    record_trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'step_multipliers', tuple(float(x) for x in self.step_multipliers))
        for name in ('max_iters', 'init_std', 'step_init', 'grad_stop', 'move_tol', 'stall_limit'):
            if not getattr(self, name) > 0:
                raise InvalidInput("GDOptions", "[ERROR] %s must be positive, got %s" % (name, getattr(self, name)))
        if len(self.step_multipliers) == 0 or any(not x > 0 for x in self.step_multipliers):
            raise InvalidInput("GDOptions", "[ERROR] step_multipliers must be a non-empty list of positive values")
        if self.step_mode not in (STEP_RUNNING, STEP_FIXED):
            raise InvalidInput("GDOptions", "[ERROR] step_mode must be %s or %s, got %s" % (STEP_RUNNING, STEP_FIXED, self.step_mode))


@dataclasses.dataclass
class TrainResult:
    G: torch.Tensor
    iterations: int
    stop_reason: str
    final_train_loss: float
    initial_train_loss: float
    loss_trace: Optional[list] = None


PCAFit = collections.namedtuple('PCAFit', ['components', 'eigenvalues'])


def pca_fit(X, k):
    """
    Top-k principal components of the (uncentered) sample covariance :math:`\\frac{1}{n}XX^T`.

    The components are the left singular vectors of X, :math:`\\lambda_i = s_i^2/n`. Singular values below
    the rank cutoff max(d,n)*eps*:math:`s_{max}` count as 0; past the rank the components are an
    orthonormal completion of the null space with eigenvalue exactly 0. For k > d the columns past d
    are zero (no orthonormal completion exists there), with eigenvalue 0.

    Args:
        X:
            d x n data matrix.

        k:
            number of components, >= 1.

    Return:
        PCAFit(components, eigenvalues), components d x k, eigenvalues length k, descending.

    """
    X = as_matrix(X, "pca_fit")
    if k < 1:
        raise InvalidInput("pca_fit", "[ERROR] k must be >= 1, got %d" % k)
    d, n = X.shape
    if n == 0:
        raise InvalidInput("pca_fit", "[ERROR] X has no samples")

    u, sv, _ = torch.linalg.svd(X, full_matrices=True)
    cutoff = max(d, n) * torch.finfo(DTYPE).eps * float(sv[0]) if sv.numel() > 0 else 0.
    sv = torch.where(sv > cutoff, sv, torch.zeros_like(sv))
    s = torch.zeros(d, dtype=DTYPE)
    s[:sv.numel()] = sv * sv / n

    kk = min(k, d)
    comps = torch.zeros(d, k, dtype=DTYPE)
    vals = torch.zeros(k, dtype=DTYPE)
    comps[:, :kk] = u[:, :kk]
    vals[:kk] = s[:kk]
    return PCAFit(comps, vals)


def pca_generator(X, k):
    """
    PCA generator, the optimal linear generator in the LQG setting

        :math:`G = V_k\\,\\mathrm{diag}(\\sqrt{\\lambda_1},\\dots,\\sqrt{\\lambda_k})`

    :math:`GG^T` is the rank-k truncation of :math:`\\frac{1}{n}XX^T`; for k >= rank(X) it equals the
    sample covariance.

    Return:
        torch.Tensor, d x k

    """
    fit = pca_fit(X, k)
    return fit.components * torch.sqrt(fit.eigenvalues)


def gd_train(spec, part, k, opts=None, rng=None):
    """
    Adaptive step-size gradient descent on the training loss.

    G starts i.i.d. :math:`\\mathcal{N}(0, \\text{init\\_std}^2)`. Every iteration evaluates the loss at
    :math:`G - (\\text{step}\\cdot m_i)\\nabla L` for every multiplier :math:`m_i` and adopts the best candidate.
    Stops when

        1. the iteration count reaches max_iters,
        2. :math:`\\|\\nabla L\\|_F` < grad_stop,
        3. :math:`\\|\\Delta G\\|_F` < move_tol for more than stall_limit consecutive iterations.

    Args:
        spec:
            LossSpec

        part:
            Partition

        k:
            latent dimension of G.

        opts:
            GDOptions, defaults if None.

        rng:
            torch.Generator for the initial G.

    Return:
        TrainResult

    """
    if not isinstance(spec, LossSpec):
        raise InvalidInput("gd_train", "[ERROR] spec should be a LossSpec")
    if k < 1:
        raise InvalidInput("gd_train", "[ERROR] k must be >= 1, got %d" % k)
    if opts is None:
        opts = GDOptions()

    G = opts.init_std * torch.randn(part.d, k, generator=rng, dtype=DTYPE)
    loss = loss_value(spec, G, part)
    initial = loss
    trace = [loss] if opts.record_trace else None

    step = opts.step_init
    stall = 0
    it = 0
    while True:
        grad = loss_gradient(spec, G, part)
        if float(torch.linalg.norm(grad)) < opts.grad_stop:
            stop = STOP_GRAD_SMALL
            break
        if it >= opts.max_iters:
            stop = STOP_MAX_ITERS
            break

        base = step if opts.step_mode == STEP_RUNNING else opts.step_init
        best_loss, best_G, best_step = None, None, None
        for mult in opts.step_multipliers:
            cand = G - (base * mult) * grad
            cand_loss = loss_value(spec, cand, part)
            if best_loss is None or cand_loss < best_loss:
                best_loss, best_G, best_step = cand_loss, cand, base * mult

        it += 1
        if best_loss <= loss or opts.accept_increase:
            move = float(torch.linalg.norm(best_G - G))
            G, loss = best_G, best_loss
            if opts.step_mode == STEP_RUNNING:
                step = best_step
        else:
            move = 0.

        if trace is not None:
            trace.append(loss)

        if move < opts.move_tol:
            stall += 1
            if stall > opts.stall_limit:
                stop = STOP_STALLED
                break
        else:
            stall = 0

    logger.debug("gd_train %s k=%d: %s after %d iterations, loss %.6g -> %.6g", spec, k, stop, it, initial, loss)
    return TrainResult(G=G, iterations=it, stop_reason=stop, final_train_loss=loss,
                       initial_train_loss=initial, loss_trace=trace)
