import collections
import numpy as np
import torch

from .errors import InvalidInput, NotPSD, UnsupportedDimension

__all__ = ['DTYPE', 'SymmetricEigen', 'as_matrix', 'frobenius_norm', 'sym_eigen', 'psd_sqrt',
           'pinv', 'is_power_of_two', 'hadamard', 'random_orthonormal_cols']

DTYPE = torch.float64

## relative tolerances shared by the whole package
SYM_TOL = 1e-9
NEG_EIG_TOL = 1e-10
## eigenvalues below RANK_TOL * max|lambda| are numerical zeros
RANK_TOL = 1e-12


SymmetricEigen = collections.namedtuple('SymmetricEigen', ['eigenvalues', 'eigenvectors'])
SymmetricEigen.__doc__ = """
    Eigendecomposition of a symmetric matrix.

    eigenvalues:
        1d torch.Tensor, in descending order.

    eigenvectors:
        2d torch.Tensor, orthonormal columns. Column i pairs with eigenvalues[i].
"""


def as_matrix(a, where="as_matrix", ndim=2):
    """
    Convert the input into a float64 torch tensor and check it is finite.

    Args:
        a:
            torch.Tensor, numpy array or (nested) python list.

        where:
            name of the calling operation, used in the error message.

        ndim:
            the required number of dimensions (2 for matrices, 1 for vectors).

    Return:
        torch.Tensor, dtype float64.
    """
    if isinstance(a, torch.Tensor):
        t = a.detach().to(dtype=DTYPE)
    else:
        t = torch.as_tensor(np.asarray(a, dtype=np.float64), dtype=DTYPE)

    if t.dim() != ndim:
        raise InvalidInput(where, "[ERROR] expect a %d-dim array, got shape %s" % (ndim, tuple(t.shape)))
    if not bool(torch.isfinite(t).all()):
        raise InvalidInput(where, "[ERROR] input contains NaN or Inf")
    return t


def frobenius_norm(a):
    """
    Frobenius norm of a matrix.

        :math:`\\|A\\|_F`

    Return:
        python float
    """
    a = as_matrix(a, "frobenius_norm")
    return float(torch.linalg.norm(a))


def _check_symmetric(a, where):
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(where, "[ERROR] matrix must be square, got shape %s" % (tuple(a.shape),))
    scale = float(torch.linalg.norm(a))
    asym = float(torch.linalg.norm(a - a.T))
    if asym > SYM_TOL * max(scale, 1e-300):
        raise InvalidInput(where, "[ERROR] matrix is not symmetric (relative asymmetry %.3e)" % (asym / scale))


def sym_eigen(a):
    """
    Eigendecomposition of a symmetric matrix

        :math:`A = V \\Lambda V^T`

    The matrix is symmetrized as :math:`(A + A^T)/2` before calling torch.linalg.eigh, so roundoff
    asymmetry below the tolerance does not leak into the eigenvectors.

    Args:
        a:
            square symmetric matrix. Relative asymmetry above 1e-9 is rejected.

    Return:
        SymmetricEigen, eigenvalues in descending order.

    Example:

        >>> e = lingan.sym_eigen(torch.diag(torch.tensor([4., 9.])))
        >>> print(e.eigenvalues)
        tensor([9., 4.], dtype=torch.float64)

    """
    a = as_matrix(a, "sym_eigen")
    _check_symmetric(a, "sym_eigen")

    s, u = torch.linalg.eigh(0.5 * (a + a.T))
    return SymmetricEigen(torch.flip(s, dims=[0]), torch.flip(u, dims=[1]))


def psd_sqrt(a):
    """
    Square root of a symmetric positive semi-definite matrix.

        :math:`S = V \\Lambda^{1/2} V^T,\\quad S S = A`

    Eigenvalues in :math:`[-10^{-10}\\max|\\lambda|, 0)` are roundoff on rank-deficient matrices
    (e.g. :math:`GG^T`) and are clamped to 0, as are positive eigenvalues below :math:`10^{-12}\\max|\\lambda|`
    (the numerical rank cutoff).

    Args:
        a:
            symmetric PSD matrix.

    Return:
        torch.Tensor, symmetric PSD.

    """
    e = sym_eigen(a)
    s, u = e.eigenvalues, e.eigenvectors
    if s.numel() == 0:
        return torch.zeros_like(u)

    tol = NEG_EIG_TOL * float(torch.max(torch.abs(s)))
    if float(s[-1]) < -tol:
        raise NotPSD("psd_sqrt", "[ERROR] eigenvalue %.6e below the clamp window -%.3e" % (float(s[-1]), tol))

    root = torch.sqrt(torch.where(s > RANK_TOL * float(torch.max(torch.abs(s))), s, torch.zeros_like(s)))
    out = torch.matmul(u * root, u.T)
    return 0.5 * (out + out.T)


def pinv(a):
    """
    Moore-Penrose pseudo-inverse

        :math:`A^+ = V \\Sigma^+ U^T`

    Singular values below max(rows, cols) * eps * :math:`\\sigma_{max}` are treated as zero.

    Args:
        a:
            any finite matrix.

    Return:
        torch.Tensor, shape (cols, rows).

    Example:

        >>> print(lingan.pinv(torch.diag(torch.tensor([2., 0.]))))
        tensor([[0.5000, 0.0000],
                [0.0000, 0.0000]], dtype=torch.float64)

    """
    a = as_matrix(a, "pinv")
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return torch.zeros(cols, rows, dtype=DTYPE)

    u, s, vh = torch.linalg.svd(a, full_matrices=False)
    smax = float(s[0])
    if smax == 0.:
        return torch.zeros(cols, rows, dtype=DTYPE)

    cutoff = max(rows, cols) * torch.finfo(DTYPE).eps * smax
    keep = s > cutoff
    s_inv = torch.where(keep, 1. / torch.where(keep, s, torch.ones_like(s)), torch.zeros_like(s))
    return torch.matmul(vh.T * s_inv, u.T)


def is_power_of_two(d):
    return isinstance(d, (int, np.integer)) and d >= 1 and (d & (d - 1)) == 0


def hadamard(d, dtype=DTYPE):
    """
    Hadamard matrix by Sylvester construction

        :math:`H_{2n} = \\begin{pmatrix} H_n & H_n \\\\ H_n & -H_n \\end{pmatrix},\\quad H_1 = [1]`

    The construction runs in int64, so :math:`H^T H = d I` holds exactly.

    Args:
        d:
            the order, must be a power of 2.

        dtype:
            the torch dtype of the returned matrix.

    Return:
        torch.Tensor of shape (d, d) with entries +1/-1.

    """
    if not is_power_of_two(d):
        raise UnsupportedDimension("hadamard", "[ERROR] Sylvester construction requires d to be a power of 2, got %s" % (d,))

    h = torch.ones(1, 1, dtype=torch.int64)
    while h.shape[0] < d:
        h = torch.cat([torch.cat([h, h], dim=1),
                       torch.cat([h, -h], dim=1)], dim=0)
    return h.to(dtype)


def random_orthonormal_cols(d, m, rng=None):
    """
    A d x m matrix with orthonormal columns, from the QR decomposition of a standard Gaussian matrix.
    The sign of each column is fixed by the diagonal of R, so the result is a deterministic
    function of the generator state.

    Args:
        d:
            number of rows.

        m:
            number of columns, m <= d.

        rng:
            torch.Generator. If None, the global torch generator is used.

    Return:
        torch.Tensor, shape (d, m), :math:`Q^T Q = I_m`.

    """
    if m < 1 or d < 1:
        raise InvalidInput("random_orthonormal_cols", "[ERROR] d and m must be >= 1, got d=%d m=%d" % (d, m))
    if m > d:
        raise InvalidInput("random_orthonormal_cols", "[ERROR] cannot have m=%d orthonormal columns in dimension d=%d" % (m, d))

    a = torch.randn(d, m, generator=rng, dtype=DTYPE)
    q, r = torch.linalg.qr(a, mode='reduced')
    sgn = torch.sign(torch.diagonal(r))
    sgn[sgn == 0] = 1.
    return q * sgn
