import collections
import math
import torch

from .errors import InvalidInput, NumericalFailure, SingularCovariance
from .linalg import DTYPE, RANK_TOL, as_matrix, psd_sqrt, sym_eigen
from .Gaussian import Gaussian, CoordinateSet

__all__ = ['NormSummary', 'w2', 'w2_squared', 'gaussian_kl', 'marginalize', 'zero_pad_coords',
           'pseudo_w2', 'pseudo_w2_zero_padded', 'rotate', 'subspace_pseudo_basis',
           'subspace_pseudo_w2', 'norm_concentration']

RADICAND_TOL = 1e-9
ORTHO_TOL = 1e-10

NormSummary = collections.namedtuple('NormSummary', ['mean_ratio', 'std_ratio', 'm', 'samples'])


def _check_pair(a, b, where):
    if not isinstance(a, Gaussian) or not isinstance(b, Gaussian):
        raise InvalidInput(where, "[ERROR] both arguments should be Gaussian")
    if a.dim != b.dim:
        raise InvalidInput(where, "[ERROR] dimension mismatch: %d vs %d" % (a.dim, b.dim))


def _trace_sqrt(m):
    ## m is PSD by construction, eigenvalues below the rank cutoff are roundoff.
    s = sym_eigen(0.5 * (m + m.T)).eigenvalues
    if s.numel() == 0:
        return 0.
    s = torch.where(s > RANK_TOL * float(torch.max(torch.abs(s))), s, torch.zeros_like(s))
    return float(torch.sum(torch.sqrt(s)))


def w2_squared(a, b):
    """
    Squared 2-Wasserstein distance between two Gaussians

        :math:`W_2^2 = \\|\\mu_1-\\mu_2\\|^2 + \\mathrm{tr}\\Sigma_1 + \\mathrm{tr}\\Sigma_2 - 2\\,\\mathrm{tr}(\\Sigma_1^{1/2}\\Sigma_2\\Sigma_1^{1/2})^{1/2}`

    A radicand that dips below zero by at most 1e-9 (tr :math:`\\Sigma_1` + tr :math:`\\Sigma_2` + 1) is roundoff
    and is clamped to 0; anything further below raises NumericalFailure.

    Args:
        a, b:
            Gaussian of the same dimension.

    Return:
        python float, >= 0

    Example:

        >>> a = lingan.Gaussian([0., 0.], torch.diag(torch.tensor([4., 9.])))
        >>> b = lingan.Gaussian([0., 0.], torch.eye(2))
        >>> print(lingan.w2_squared(a, b))
        5.0

    """
    _check_pair(a, b, "w2_squared")
    if a.dim == 0 or a == b:
        return 0.

    tr1 = float(torch.trace(a.covariance))
    tr2 = float(torch.trace(b.covariance))
    mean_term = float(torch.sum((a.mean - b.mean) ** 2))

    s1 = psd_sqrt(a.covariance)
    cross = _trace_sqrt(torch.matmul(torch.matmul(s1, b.covariance), s1))

    radicand = mean_term + tr1 + tr2 - 2. * cross
    if radicand < 0.:
        window = RADICAND_TOL * (tr1 + tr2 + 1.)
        if radicand < -window:
            raise NumericalFailure("w2_squared", "[ERROR] radicand %.6e is below the clamp window -%.3e" % (radicand, window))
        radicand = 0.
    return radicand


def w2(a, b):
    """
    2-Wasserstein distance between two Gaussians, the square root of w2_squared().

    Example:

        >>> a = lingan.Gaussian([3., 4.], torch.eye(2))
        >>> b = lingan.Gaussian([0., 0.], torch.eye(2))
        >>> print(lingan.w2(a, b))
        5.0

    """
    return math.sqrt(w2_squared(a, b))


def _cholesky(cov, where, which):
    L, info = torch.linalg.cholesky_ex(cov)
    if int(info) != 0:
        raise SingularCovariance(where, "[ERROR] covariance of %s is not positive definite" % which)
    return L


def gaussian_kl(a, b):
    """
    Kullback-Leibler divergence :math:`KL(a\\|b)` between two Gaussians

        :math:`\\frac{1}{2}\\left(\\mathrm{tr}(\\Sigma_2^{-1}\\Sigma_1) + (\\mu_2-\\mu_1)^T\\Sigma_2^{-1}(\\mu_2-\\mu_1) - d + \\ln\\det\\Sigma_2 - \\ln\\det\\Sigma_1\\right)`

    Both covariances must be strictly positive definite; there is no regularization.

    Args:
        a, b:
            Gaussian of the same dimension.

    Return:
        python float, >= 0

    """
    _check_pair(a, b, "gaussian_kl")
    d = a.dim
    if d == 0:
        return 0.

    L2 = _cholesky(b.covariance, "gaussian_kl", "the second argument")
    L1 = _cholesky(a.covariance, "gaussian_kl", "the first argument")

    tr_term = float(torch.trace(torch.cholesky_solve(a.covariance, L2)))
    diff = (b.mean - a.mean).unsqueeze(1)
    quad = float(torch.sum(diff * torch.cholesky_solve(diff, L2)))
    logdet2 = 2. * float(torch.sum(torch.log(torch.diagonal(L2))))
    logdet1 = 2. * float(torch.sum(torch.log(torch.diagonal(L1))))

    return max(0., 0.5 * (tr_term + quad - d + logdet2 - logdet1))


def marginalize(g, drop):
    """
    Marginal distribution on the coordinates not in ``drop``: the sub-mean and the principal submatrix
    of the covariance.

    Args:
        g:
            Gaussian.

        drop:
            CoordinateSet (or iterable of indices) to integrate out.

    Return:
        Gaussian of dimension d - len(drop).

    """
    if not isinstance(drop, CoordinateSet):
        drop = CoordinateSet(drop)
    drop.check(g.dim, "marginalize")
    if len(drop) == 0:
        return g
    keep = drop.complement(g.dim).as_tensor()
    cov = g.covariance.index_select(0, keep).index_select(1, keep)
    return Gaussian(g.mean.index_select(0, keep), cov, check=False)


def zero_pad_coords(g, zeroed):
    """
    Replace the coordinates in ``zeroed`` by univariate point masses at 0: the mean entries and the
    covariance rows/columns on those indices are set to 0. The dimension is unchanged.

    Args:
        g:
            Gaussian.

        zeroed:
            CoordinateSet (or iterable of indices).

    Return:
        Gaussian of dimension d.

    """
    if not isinstance(zeroed, CoordinateSet):
        zeroed = CoordinateSet(zeroed)
    zeroed.check(g.dim, "zero_pad_coords")
    if len(zeroed) == 0:
        return g
    idx = zeroed.as_tensor()
    mean = g.mean.clone()
    cov = g.covariance.clone()
    mean[idx] = 0.
    cov[idx, :] = 0.
    cov[:, idx] = 0.
    return Gaussian(mean, cov, check=False)


def pseudo_w2(a, b, ignored):
    """
    2-Wasserstein pseudometric that ignores the coordinates in ``ignored``

        :math:`W_{d,A}(P,P') = W_{d-|A|}(P_{A^C}, P'_{A^C})`

    computed on the marginals. It equals the distance between the zero-padded distributions,
    see pseudo_w2_zero_padded().

    Args:
        a, b:
            Gaussian of the same dimension.

        ignored:
            CoordinateSet (or iterable of indices).

    Return:
        python float, >= 0

    """
    _check_pair(a, b, "pseudo_w2")
    if not isinstance(ignored, CoordinateSet):
        ignored = CoordinateSet(ignored)
    ignored.check(a.dim, "pseudo_w2")
    if len(ignored) == a.dim:
        return 0.
    return w2(marginalize(a, ignored), marginalize(b, ignored))


def pseudo_w2_zero_padded(a, b, ignored):
    """
    The same pseudometric as pseudo_w2(), computed in the full dimension on the zero-padded distributions.
    """
    _check_pair(a, b, "pseudo_w2_zero_padded")
    if not isinstance(ignored, CoordinateSet):
        ignored = CoordinateSet(ignored)
    ignored.check(a.dim, "pseudo_w2_zero_padded")
    return w2(zero_pad_coords(a, ignored), zero_pad_coords(b, ignored))


def rotate(g, U):
    """
    Distribution of :math:`U^T x` for :math:`x \\sim g`, i.e. :math:`\\mathcal{N}(U^T\\mu, U^T\\Sigma U)`.
    """
    U = as_matrix(U, "rotate")
    if U.shape[0] != g.dim:
        raise InvalidInput("rotate", "[ERROR] U has %d rows, Gaussian has dimension %d" % (U.shape[0], g.dim))
    cov = torch.matmul(torch.matmul(U.T, g.covariance), U)
    return Gaussian(torch.matmul(U.T, g.mean), 0.5 * (cov + cov.T), check=False)


def subspace_pseudo_basis(V_basis, complement):
    """
    Orthonormal basis :math:`U = [v_1 \\dots v_d]` whose first dim(V) columns span the subspace V.
    Rotating by :math:`U^T` and then ignoring the first dim(V) coordinates gives a pseudometric that
    is blind to V.

    Args:
        V_basis:
            d x p matrix with orthonormal columns spanning V.

        complement:
            d x (d-p) matrix completing the basis.

    Return:
        torch.Tensor, d x d orthonormal matrix.

    """
    V_basis = as_matrix(V_basis, "subspace_pseudo_basis")
    complement = as_matrix(complement, "subspace_pseudo_basis")
    if V_basis.shape[0] != complement.shape[0]:
        raise InvalidInput("subspace_pseudo_basis", "[ERROR] row count mismatch: %d vs %d" % (V_basis.shape[0], complement.shape[0]))

    U = torch.cat([V_basis, complement], dim=1)
    d = U.shape[0]
    if U.shape[1] != d:
        raise InvalidInput("subspace_pseudo_basis", "[ERROR] combined basis has %d columns, need %d" % (U.shape[1], d))

    err = float(torch.linalg.norm(torch.matmul(U.T, U) - torch.eye(d, dtype=DTYPE)))
    if err > ORTHO_TOL * max(1., d):
        raise InvalidInput("subspace_pseudo_basis", "[ERROR] combined basis is not orthonormal (deviation %.3e)" % err)
    return U


def subspace_pseudo_w2(a, b, U, dim_v):
    """
    Pseudometric invariant to the subspace spanned by the first ``dim_v`` columns of U.

    Args:
        a, b:
            Gaussian of the same dimension d.

        U:
            d x d orthonormal basis, from subspace_pseudo_basis().

        dim_v:
            dimension of the ignored subspace.

    """
    _check_pair(a, b, "subspace_pseudo_w2")
    return pseudo_w2(rotate(a, U), rotate(b, U), CoordinateSet(range(dim_v), d=a.dim))


def norm_concentration(m, samples, rng=None, chunk=4096):
    """
    Monte Carlo estimate of how :math:`\\|z\\|_2/\\sqrt{m}` concentrates for :math:`z \\sim \\mathcal{N}(0, I_m)`.

    Args:
        m:
            dimension, >= 1.

        samples:
            number of draws, >= 1.

        rng:
            torch.Generator.

        chunk:
            number of vectors drawn at once.

    Return:
        NormSummary(mean_ratio, std_ratio, m, samples), std is the population standard deviation.

    """
    if m < 1 or samples < 1:
        raise InvalidInput("norm_concentration", "[ERROR] need m >= 1 and samples >= 1, got m=%d samples=%d" % (m, samples))

    ratios = []
    left = samples
    while left > 0:
        b = min(chunk, left)
        z = torch.randn(b, m, generator=rng, dtype=DTYPE)
        ratios.append(torch.linalg.norm(z, dim=1) / math.sqrt(m))
        left -= b
    r = torch.cat(ratios)
    mean = float(torch.mean(r))
    std = float(torch.sqrt(torch.mean((r - mean) ** 2)))
    return NormSummary(mean, std, m, samples)
