import unittest
import torch
from context import lingan

D = torch.float64


class TestPCA(unittest.TestCase):

    def setUp(self):
        g = torch.Generator()
        g.manual_seed(0)
        self.model = lingan.build_model(64, 10, 0.15)
        self.X = lingan.sample(self.model, 20, g).x

    def test_diagonal(self):
        X = torch.diag(torch.tensor([3., 2., 1.], dtype=D))
        fit = lingan.pca_fit(X, 2)
        self.assertTrue(torch.allclose(fit.eigenvalues, torch.tensor([3., 4. / 3.], dtype=D)))
        self.assertTrue(torch.allclose(torch.abs(fit.components), torch.eye(3, dtype=D)[:, :2]))

    def test_orthonormal(self):
        fit = lingan.pca_fit(self.X, 30)
        V = fit.components
        self.assertTrue(torch.allclose(V.T @ V, torch.eye(30, dtype=D), atol=1e-12))
        self.assertTrue(bool(torch.all(fit.eigenvalues[:-1] >= fit.eigenvalues[1:])))
        self.assertTrue(bool(torch.all(fit.eigenvalues[20:] == 0.)))

    def test_k_beyond_d(self):
        fit = lingan.pca_fit(self.X, 100)
        self.assertEqual(tuple(fit.components.shape), (64, 100))
        self.assertTrue(bool(torch.all(fit.components[:, 64:] == 0.)))
        V = fit.components
        self.assertTrue(torch.allclose(V @ V.T, torch.eye(64, dtype=D), atol=1e-12))

    def test_generator_covariance(self):
        cov = self.X @ self.X.T / 20
        for k in (20, 40, 64, 127):
            G = lingan.pca_generator(self.X, k)
            self.assertLess(float(torch.linalg.norm(G @ G.T - cov)), 1e-10 * float(torch.linalg.norm(cov)))

    def test_generator_truncation(self):
        G = lingan.pca_generator(self.X, 5)
        fit = lingan.pca_fit(self.X, 5)
        self.assertTrue(torch.allclose(G.T @ G, torch.diag(fit.eigenvalues), atol=1e-10))

    def test_train_error_zero_for_large_k(self):
        p = lingan.Partition(self.X[:, :0], torch.zeros(20, 0, dtype=D), self.X)
        for k in (20, 64, 127):
            V = lingan.pca_fit(self.X, k).components
            self.assertLess(lingan.loss_value(lingan.LossSpec(lingan.PCA_PROJ), V, p), 1e-9)

    def test_generator_rank_k_optimal(self):
        ## G G^T is the best rank-k PSD approximation of the sample covariance
        g = torch.Generator()
        g.manual_seed(5)
        for n in (5, 8, 12):
            X = torch.randn(8, n, generator=g, dtype=D)
            cov = X @ X.T / n
            lam, U = torch.linalg.eigh(cov)
            lam, U = lam.flip(0), U.flip(1)
            for k in (1, 3, 6, 8):
                best = (U[:, :k] * lam[:k]) @ U[:, :k].T
                G = lingan.pca_generator(X, k)
                self.assertLess(float(torch.linalg.norm(G @ G.T - best)), 1e-9, msg="n=%d k=%d" % (n, k))
                dist = float(torch.linalg.norm(G @ G.T - cov))
                for _ in range(20):
                    A = torch.randn(8, k, generator=g, dtype=D)
                    self.assertLessEqual(dist, float(torch.linalg.norm(A @ A.T - cov)) + 1e-12)

    def test_invalid(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.pca_fit(self.X, 0)
        with self.assertRaises(lingan.InvalidInput):
            lingan.pca_fit(torch.zeros(3, 0), 1)


class TestGDOptions(unittest.TestCase):

    def test_defaults(self):
        o = lingan.GDOptions()
        self.assertEqual(o.max_iters, 500)
        self.assertEqual(o.step_multipliers, lingan.DEFAULT_MULTIPLIERS)
        self.assertEqual(o.step_mode, lingan.STEP_RUNNING)

    def test_invalid(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.GDOptions(max_iters=0)
        with self.assertRaises(lingan.InvalidInput):
            lingan.GDOptions(step_multipliers=())
        with self.assertRaises(lingan.InvalidInput):
            lingan.GDOptions(step_mode='sideways')


class TestGDTrain(unittest.TestCase):

    def setUp(self):
        g = torch.Generator()
        g.manual_seed(1)
        self.model = lingan.build_model(16, 3, 0.1)
        self.data = lingan.sample(self.model, 10, g)

    def _train(self, variant, k, n_ps, opts=None, seed=2, alpha=None):
        g = torch.Generator()
        g.manual_seed(seed)
        part = lingan.make_pseudo_partition(self.data, n_ps, k, g)
        return lingan.gd_train(lingan.LossSpec(variant, alpha), part, k, opts, g)

    def test_decreases(self):
        opts = lingan.GDOptions(max_iters=200, record_trace=True)
        res = self._train(lingan.PS_PLAIN, 4, 5, opts)
        self.assertLessEqual(res.final_train_loss, res.initial_train_loss)
        self.assertTrue(all(b <= a for a, b in zip(res.loss_trace, res.loss_trace[1:])))
        self.assertEqual(len(res.loss_trace), res.iterations + 1)
        self.assertIn(res.stop_reason, (lingan.STOP_MAX_ITERS, lingan.STOP_GRAD_SMALL, lingan.STOP_STALLED))

    def test_deterministic(self):
        a = self._train(lingan.PS_PINV, 5, 4, lingan.GDOptions(max_iters=30))
        b = self._train(lingan.PS_PINV, 5, 4, lingan.GDOptions(max_iters=30))
        self.assertTrue(torch.equal(a.G, b.G))
        self.assertEqual(a.iterations, b.iterations)

    def test_max_iters(self):
        res = self._train(lingan.PS_REGULARIZED, 4, 5, lingan.GDOptions(max_iters=1, grad_stop=1e-12))
        self.assertLessEqual(res.iterations, 1)

    def test_grad_small_immediately(self):
        res = self._train(lingan.PS_PLAIN, 4, 5, lingan.GDOptions(grad_stop=1e12))
        self.assertEqual(res.iterations, 0)
        self.assertEqual(res.stop_reason, lingan.STOP_GRAD_SMALL)
        self.assertEqual(res.final_train_loss, res.initial_train_loss)

    def test_stall(self):
        ## tiny steps never move G by more than move_tol
        opts = lingan.GDOptions(step_init=1e-30, step_multipliers=(1.,), grad_stop=1e-12, stall_limit=3)
        res = self._train(lingan.PS_PLAIN, 4, 5, opts)
        self.assertEqual(res.stop_reason, lingan.STOP_STALLED)
        self.assertEqual(res.iterations, 4)

    def test_fixed_step(self):
        opts = lingan.GDOptions(max_iters=20, step_mode=lingan.STEP_FIXED)
        res = self._train(lingan.PS_WEIGHTED, 4, 5, opts, alpha=0.98)
        self.assertLessEqual(res.final_train_loss, res.initial_train_loss)

    def test_pca_proj_converges_to_subspace(self):
        opts = lingan.GDOptions(max_iters=500)
        res = self._train(lingan.PCA_PROJ, 3, 0, opts)
        self.assertLess(res.final_train_loss, res.initial_train_loss)

    def test_interpolates_beyond_n(self):
        g = torch.Generator()
        g.manual_seed(0)
        model = lingan.build_model(64, 10, 0.15)
        data = lingan.sample(model, 20, g)
        ## a loose grad_stop can halt next to the saddle at G = 0 in the weak noise directions
        opts = lingan.GDOptions(max_iters=2000, grad_stop=1e-3)
        for k in (40, 64):
            part = lingan.make_pseudo_partition(data, 0, k, g)
            res = lingan.gd_train(lingan.LossSpec(lingan.PS_PLAIN), part, k, opts, g)
            self.assertLess(res.final_train_loss, 0.1, msg="k=%d" % k)

    def test_invalid(self):
        part = lingan.make_pseudo_partition(self.data, 2, 3)
        with self.assertRaises(lingan.InvalidInput):
            lingan.gd_train(lingan.LossSpec(lingan.PS_PLAIN), part, 0)
        with self.assertRaises(lingan.InvalidInput):
            lingan.gd_train('ps_plain', part, 3)


if __name__ == '__main__':
    unittest.main()
