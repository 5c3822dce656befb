import unittest
import torch
from context import lingan


class TestGaussian(unittest.TestCase):

    def test_create(self):
        g = lingan.Gaussian([1., 2.], [[1., 0.], [0., 4.]])
        self.assertEqual(g.dim, 2)
        self.assertEqual(g.mean.dtype, torch.float64)

    def test_shape_mismatch(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.Gaussian([0., 0., 0.], torch.eye(2))

    def test_asymmetric(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.Gaussian([0., 0.], [[1., 0.5], [0., 1.]])

    def test_not_psd(self):
        with self.assertRaises(lingan.NotPSD):
            lingan.Gaussian([0., 0.], [[1., 0.], [0., -1.]])

    def test_from_generator(self):
        G = torch.tensor([[1., 0.], [0., 2.], [0., 0.]], dtype=torch.float64)
        g = lingan.Gaussian.from_generator(G)
        self.assertEqual(g.dim, 3)
        self.assertTrue(torch.equal(g.covariance, G @ G.T))
        self.assertTrue(torch.equal(g.mean, torch.zeros(3, dtype=torch.float64)))

    def test_from_generator_zero_padding(self):
        G = torch.tensor([[1., 2.], [3., 4.], [5., 6.]], dtype=torch.float64)
        Gp = torch.cat([G, torch.zeros(3, 4, dtype=torch.float64)], dim=1)
        self.assertEqual(lingan.Gaussian.from_generator(G), lingan.Gaussian.from_generator(Gp))

    def test_from_generator_all_zero(self):
        g = lingan.Gaussian.from_generator(torch.zeros(4, 2))
        self.assertTrue(torch.equal(g.covariance, torch.zeros(4, 4, dtype=torch.float64)))

    def test_from_samples(self):
        X = torch.tensor([[1., -1.], [2., 0.]], dtype=torch.float64)
        g = lingan.Gaussian.from_samples(X)
        self.assertTrue(torch.allclose(g.covariance, X @ X.T / 2))

    def test_equal(self):
        a = lingan.Gaussian([0.], [[1.]])
        b = lingan.Gaussian([0.], [[1.]])
        c = lingan.Gaussian([0.], [[2.]])
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)


class TestCoordinateSet(unittest.TestCase):

    def test_sorted(self):
        s = lingan.CoordinateSet([3, 0])
        self.assertListEqual(list(s), [0, 3])
        self.assertEqual(len(s), 2)
        self.assertIn(3, s)

    def test_complement(self):
        s = lingan.CoordinateSet([3, 0])
        self.assertListEqual(list(s.complement(5)), [1, 2, 4])
        self.assertEqual(len(lingan.CoordinateSet.all(4).complement(4)), 0)

    def test_duplicates(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.CoordinateSet([1, 1])

    def test_negative(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.CoordinateSet([-1])

    def test_out_of_range(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.CoordinateSet([0, 5], d=5)

    def test_equal(self):
        self.assertEqual(lingan.CoordinateSet([2, 1]), lingan.CoordinateSet([1, 2]))


if __name__ == '__main__':
    unittest.main()
