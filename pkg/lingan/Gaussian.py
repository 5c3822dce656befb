import torch

from .errors import InvalidInput, NotPSD
from .linalg import DTYPE, SYM_TOL, NEG_EIG_TOL, as_matrix

__all__ = ['Gaussian', 'CoordinateSet']


class Gaussian:
    """
    Multivariate normal distribution :math:`\\mathcal{N}(\\mu, \\Sigma)`.

    Args:
        mean:
            1d array of length d.

        covariance:
            d x d symmetric PSD matrix. Relative asymmetry above 1e-9 or an eigenvalue below
            :math:`-10^{-10}\\max|\\lambda|` is rejected.

        check:
            bool, if False the symmetry/PSD checks are skipped. Used internally for covariances
            that are PSD by construction (e.g. principal submatrices).

    Example:

        >>> g = lingan.Gaussian([1., 2.], [[1., 0.], [0., 4.]])
        >>> print(g.dim)
        2

    """
    def __init__(self, mean, covariance, check=True):
        mean = as_matrix(mean, "Gaussian.__init__", ndim=1)
        covariance = as_matrix(covariance, "Gaussian.__init__")

        if covariance.shape != (mean.shape[0], mean.shape[0]):
            raise InvalidInput("Gaussian.__init__", "[ERROR] covariance shape %s does not match mean length %d"
                               % (tuple(covariance.shape), mean.shape[0]))

        if check and mean.shape[0] > 0:
            scale = float(torch.linalg.norm(covariance))
            if float(torch.linalg.norm(covariance - covariance.T)) > SYM_TOL * max(scale, 1e-300):
                raise InvalidInput("Gaussian.__init__", "[ERROR] covariance is not symmetric")
            s = torch.linalg.eigvalsh(0.5 * (covariance + covariance.T))
            if float(s[0]) < -NEG_EIG_TOL * float(torch.max(torch.abs(s))):
                raise NotPSD("Gaussian.__init__", "[ERROR] covariance has eigenvalue %.6e" % float(s[0]))

        self.mean = mean
        self.covariance = covariance

    @property
    def dim(self):
        return self.mean.shape[0]

    @classmethod
    def from_generator(cls, G):
        """
        The distribution generated by a linear generator, :math:`\\mathcal{N}(0, GG^T)`.

        Args:
            G:
                d x k generator matrix.
        """
        G = as_matrix(G, "Gaussian.from_generator")
        ## all-zero columns do not change GG^T; dropping them keeps the product identical under zero padding.
        G = G[:, torch.any(G != 0, dim=0)]
        cov = torch.matmul(G, G.T)
        return cls(torch.zeros(G.shape[0], dtype=DTYPE), 0.5 * (cov + cov.T), check=False)

    @classmethod
    def from_samples(cls, X):
        """
        Zero-mean empirical Gaussian of the columns of X, :math:`\\mathcal{N}(0, \\frac{1}{n}XX^T)`.
        No centering is done: the data model is zero-mean.

        Args:
            X:
                d x n data matrix, columns are samples.
        """
        X = as_matrix(X, "Gaussian.from_samples")
        if X.shape[1] == 0:
            raise InvalidInput("Gaussian.from_samples", "[ERROR] need at least one sample")
        cov = torch.matmul(X, X.T) / X.shape[1]
        return cls(torch.zeros(X.shape[0], dtype=DTYPE), 0.5 * (cov + cov.T), check=False)

    def __eq__(self, rhs):
        if not isinstance(rhs, Gaussian):
            return NotImplemented
        return torch.equal(self.mean, rhs.mean) and torch.equal(self.covariance, rhs.covariance)

    def __repr__(self):
        return "Gaussian(dim=%d)\nmean      : %s\ncovariance:\n%s" % (self.dim, self.mean, self.covariance)


class CoordinateSet:
    """
    A sorted set of unique coordinate indices.

    Args:
        indices:
            iterable of non-negative integers, no duplicates.

        d:
            optional ambient dimension. If given, every index must be < d.

    Example:

        >>> s = lingan.CoordinateSet([3, 0])
        >>> print(list(s))
        [0, 3]
        >>> print(list(s.complement(5)))
        [1, 2, 4]

    """
    def __init__(self, indices=(), d=None):
        idx = [int(i) for i in indices]
        if len(set(idx)) != len(idx):
            raise InvalidInput("CoordinateSet", "[ERROR] indices contain duplicates: %s" % idx)
        if any(i < 0 for i in idx):
            raise InvalidInput("CoordinateSet", "[ERROR] indices must be non-negative: %s" % idx)
        self.indices = tuple(sorted(idx))
        if d is not None:
            self.check(d, "CoordinateSet")

    @classmethod
    def all(cls, d):
        return cls(range(d))

    def check(self, d, where):
        if self.indices and self.indices[-1] >= d:
            raise InvalidInput(where, "[ERROR] index %d out of range for dimension %d" % (self.indices[-1], d))

    def complement(self, d):
        self.check(d, "CoordinateSet.complement")
        drop = set(self.indices)
        return CoordinateSet([i for i in range(d) if i not in drop])

    def as_tensor(self):
        return torch.tensor(self.indices, dtype=torch.int64)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def __eq__(self, rhs):
        if not isinstance(rhs, CoordinateSet):
            return NotImplemented
        return self.indices == rhs.indices

    def __repr__(self):
        return "CoordinateSet(%s)" % list(self.indices)
