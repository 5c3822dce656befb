import math
import torch

from .errors import InvalidInput, UnsupportedDimension
from .linalg import DTYPE, as_matrix, hadamard, is_power_of_two, random_orthonormal_cols
from .Gaussian import Gaussian, CoordinateSet

__all__ = ['HADAMARD', 'RANDOM_ORTHONORMAL', 'AUTO', 'GammaKinds', 'PSEUDO', 'SUPERVISED', 'DataModel', 'Dataset', 'Partition',
           'build_model', 'sample', 'make_pseudo_partition', 'make_supervised_partition',
           'subsample_latent', 'first_coordinates', 'random_coordinates']

##### Constants #######
HADAMARD = 'hadamard'
RANDOM_ORTHONORMAL = 'random_orthonormal'
AUTO = 'auto'
GammaKinds = (HADAMARD, RANDOM_ORTHONORMAL, AUTO)

## Partition kinds
PSEUDO = 'pseudo'
SUPERVISED = 'supervised'
#######################


class DataModel:
    """
    Noisy linear model

        :math:`x = \\Gamma z + \\epsilon,\\quad z \\sim \\mathcal{N}(0, I_m),\\quad \\epsilon \\sim \\mathcal{N}(0, \\sigma^2 I_d)`

    Args:
        gamma:
            d x m factor matrix of rank m.

        sigma:
            noise standard deviation, >= 0.

    Attributes:
        d, m:
            ambient and latent dimensions.

    """
    def __init__(self, gamma, sigma):
        gamma = as_matrix(gamma, "DataModel.__init__")
        d, m = gamma.shape
        if m < 1 or m > d:
            raise InvalidInput("DataModel.__init__", "[ERROR] gamma must be d x m with 1 <= m <= d, got %s" % (tuple(gamma.shape),))
        if sigma < 0:
            raise InvalidInput("DataModel.__init__", "[ERROR] sigma must be >= 0, got %s" % sigma)
        if int(torch.linalg.matrix_rank(gamma)) != m:
            raise InvalidInput("DataModel.__init__", "[ERROR] gamma must have full column rank %d" % m)

        self.gamma = gamma
        self.sigma = float(sigma)
        self.d = d
        self.m = m

    def true_distribution(self):
        """
        The clean distribution :math:`\\mathcal{N}(0, \\Gamma\\Gamma^T)`.
        """
        return Gaussian.from_generator(self.gamma)

    def noisy_distribution(self):
        """
        The data distribution :math:`\\mathcal{N}(0, \\Gamma\\Gamma^T + \\sigma^2 I_d)`.
        """
        g = self.true_distribution()
        return Gaussian(g.mean, g.covariance + self.sigma ** 2 * torch.eye(self.d, dtype=DTYPE), check=False)

    def __repr__(self):
        return "DataModel(d=%d, m=%d, sigma=%g)" % (self.d, self.m, self.sigma)


class Dataset:
    """
    Samples of a DataModel.

    Args:
        x:
            d x n matrix, columns are samples.

        z_true:
            optional m x n matrix of the latent vectors that generated x.

    """
    def __init__(self, x, z_true=None):
        x = as_matrix(x, "Dataset.__init__")
        if z_true is not None:
            z_true = as_matrix(z_true, "Dataset.__init__")
            if z_true.shape[1] != x.shape[1]:
                raise InvalidInput("Dataset.__init__", "[ERROR] z_true has %d columns, x has %d" % (z_true.shape[1], x.shape[1]))
        self.x = x
        self.z_true = z_true

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def d(self):
        return self.x.shape[0]


class Partition:
    """
    Training data split into (pseudo-)supervised pairs and an unsupervised remainder.

    Args:
        x_ps:
            d x n_ps matrix, the data half of the pairs.

        z_ps:
            k x n_ps matrix, the latent half of the pairs.

        x_unsup:
            d x n_unsup matrix.

        kind:
            PSEUDO or SUPERVISED, how z_ps was obtained.

    """
    def __init__(self, x_ps, z_ps, x_unsup, kind=PSEUDO):
        x_ps = as_matrix(x_ps, "Partition.__init__")
        z_ps = as_matrix(z_ps, "Partition.__init__")
        x_unsup = as_matrix(x_unsup, "Partition.__init__")

        if x_ps.shape[1] != z_ps.shape[1]:
            raise InvalidInput("Partition.__init__", "[ERROR] x_ps has %d columns, z_ps has %d" % (x_ps.shape[1], z_ps.shape[1]))
        if x_ps.shape[0] != x_unsup.shape[0]:
            raise InvalidInput("Partition.__init__", "[ERROR] x_ps has %d rows, x_unsup has %d" % (x_ps.shape[0], x_unsup.shape[0]))

        self.x_ps = x_ps
        self.z_ps = z_ps
        self.x_unsup = x_unsup
        self.kind = kind

    @property
    def n_ps(self):
        return self.x_ps.shape[1]

    @property
    def n_unsup(self):
        return self.x_unsup.shape[1]

    @property
    def n(self):
        return self.n_ps + self.n_unsup

    @property
    def d(self):
        return self.x_unsup.shape[0]

    @property
    def k(self):
        return self.z_ps.shape[0]

    @property
    def x(self):
        """
        The full data matrix :math:`[X^{PS} | X^{UNSUP}]`.
        """
        return torch.cat([self.x_ps, self.x_unsup], dim=1)

    def __repr__(self):
        return "Partition(kind=%s, d=%d, k=%d, n_ps=%d, n_unsup=%d)" % (self.kind, self.d, self.k, self.n_ps, self.n_unsup)


def build_model(d, m, sigma, kind=HADAMARD, rng=None):
    """
    Build the ground-truth model.

    Args:
        d:
            ambient dimension.

        m:
            latent dimension, m <= d.

        sigma:
            noise standard deviation.

        kind:
            HADAMARD: first m columns of the d x d Sylvester-Hadamard matrix scaled by :math:`1/\\sqrt{d}`
            (d must be a power of 2, rng is unused).

            RANDOM_ORTHONORMAL: orthonormalized Gaussian matrix drawn from rng.

            AUTO: HADAMARD when d is a power of 2, RANDOM_ORTHONORMAL otherwise.

        rng:
            torch.Generator.

    Return:
        DataModel with :math:`\\Gamma^T\\Gamma = I_m`.

    """
    if kind not in GammaKinds:
        raise InvalidInput("build_model", "[ERROR] kind must be one of %s, got %s" % (GammaKinds, kind))
    if m < 1 or m > d:
        raise InvalidInput("build_model", "[ERROR] need 1 <= m <= d, got m=%d d=%d" % (m, d))

    if kind == AUTO:
        kind = HADAMARD if is_power_of_two(d) else RANDOM_ORTHONORMAL

    if kind == HADAMARD:
        if not is_power_of_two(d):
            raise UnsupportedDimension("build_model", "[ERROR] hadamard kind requires d to be a power of 2, got %d" % d)
        gamma = hadamard(d)[:, :m] / math.sqrt(d)
    else:
        gamma = random_orthonormal_cols(d, m, rng)

    return DataModel(gamma, sigma)


def sample(model, n, rng=None):
    """
    Draw n samples :math:`x_i = \\Gamma z_i + \\epsilon_i`. The latents are kept in Dataset.z_true.

    Args:
        model:
            DataModel.

        n:
            number of samples, >= 1.

        rng:
            torch.Generator.

    Return:
        Dataset

    """
    if n < 1:
        raise InvalidInput("sample", "[ERROR] n must be >= 1, got %d" % n)
    z = torch.randn(model.m, n, generator=rng, dtype=DTYPE)
    eps = torch.randn(model.d, n, generator=rng, dtype=DTYPE)
    x = torch.matmul(model.gamma, z) + model.sigma * eps
    return Dataset(x, z)


def make_pseudo_partition(data, n_ps, k, rng=None):
    """
    Pair the first n_ps samples with fabricated latents drawn i.i.d. from :math:`\\mathcal{N}(0, I_k)`;
    the rest of the samples are unsupervised. z_true is never read.

    An n x k block is drawn and its first n_ps rows are used, so for the same generator state the
    pairs of a smaller n_ps are a prefix of the pairs of a larger one.

    Args:
        data:
            Dataset.

        n_ps:
            number of pseudo-supervised pairs, 0 <= n_ps <= n.

        k:
            latent dimension of the generator, >= 1.

        rng:
            torch.Generator.

    Return:
        Partition

    """
    if n_ps < 0 or n_ps > data.n:
        raise InvalidInput("make_pseudo_partition", "[ERROR] need 0 <= n_ps <= n=%d, got %d" % (data.n, n_ps))
    if k < 1:
        raise InvalidInput("make_pseudo_partition", "[ERROR] k must be >= 1, got %d" % k)

    z = torch.randn(data.n, k, generator=rng, dtype=DTYPE)
    z_ps = z[:n_ps, :].T.contiguous()
    return Partition(data.x[:, :n_ps], z_ps, data.x[:, n_ps:], kind=PSEUDO)


def subsample_latent(z, subsample):
    """
    Rows of z selected by the coordinate set, :math:`Z_S`.
    """
    if not isinstance(subsample, CoordinateSet):
        subsample = CoordinateSet(subsample)
    subsample.check(z.shape[0], "subsample_latent")
    return z.index_select(0, subsample.as_tensor())


def first_coordinates(k):
    return CoordinateSet(range(k))


def random_coordinates(m, k, rng=None):
    """
    A uniformly random set of k coordinates out of m.
    """
    if k < 0 or k > m:
        raise InvalidInput("random_coordinates", "[ERROR] need 0 <= k <= m, got k=%d m=%d" % (k, m))
    return CoordinateSet(torch.randperm(m, generator=rng)[:k].tolist())


def make_supervised_partition(data, n_sup, subsample):
    """
    Pair the first n_sup samples with the coordinates S of their true latents, :math:`Z^{SUP}_S`.

    Args:
        data:
            Dataset with z_true.

        n_sup:
            number of supervised pairs, 0 <= n_sup <= n.

        subsample:
            CoordinateSet S, |S| <= m.

    Return:
        Partition, with z_ps of shape |S| x n_sup.

    """
    if data.z_true is None:
        raise InvalidInput("make_supervised_partition", "[ERROR] the dataset carries no true latents")
    if n_sup < 0 or n_sup > data.n:
        raise InvalidInput("make_supervised_partition", "[ERROR] need 0 <= n_sup <= n=%d, got %d" % (data.n, n_sup))
    if not isinstance(subsample, CoordinateSet):
        subsample = CoordinateSet(subsample)
    m = data.z_true.shape[0]
    if len(subsample) > m:
        raise InvalidInput("make_supervised_partition", "[ERROR] |S|=%d exceeds the latent dimension m=%d" % (len(subsample), m))

    z_sup = subsample_latent(data.z_true[:, :n_sup], subsample)
    return Partition(data.x[:, :n_sup], z_sup, data.x[:, n_sup:], kind=SUPERVISED)
