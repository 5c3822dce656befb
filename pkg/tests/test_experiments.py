import math
import os
import pickle
import shutil
import tempfile
import unittest
import torch
from context import lingan


def small_config(**kw):
    fields = dict(d=16, m=3, n=8, sigma=0.1, trials=2, k_grid=(1, 3, 8, 12), n_ps_list=(0, 4),
                  gd=lingan.GDOptions(max_iters=20))
    fields.update(kw)
    return lingan.ExperimentConfig(**fields)


class TestTestError(unittest.TestCase):

    def setUp(self):
        self.model = lingan.build_model(64, 10, 0.15)

    def test_exact_recovery(self):
        for conv in (lingan.W2, lingan.W2_SQUARED):
            self.assertEqual(lingan.test_error(self.model.gamma, self.model, conv, lingan.CLEAN), 0.)

    def test_null_estimator(self):
        G = torch.zeros(64, 1, dtype=torch.float64)
        self.assertAlmostEqual(lingan.test_error(G, self.model), math.sqrt(10.), places=9)
        self.assertAlmostEqual(lingan.test_error(G, self.model, lingan.W2_SQUARED, lingan.NOISY),
                               10. + 64 * 0.15 ** 2, places=9)

    def test_null_estimator_table(self):
        errs = lingan.null_estimator_errors(lingan.ExperimentConfig())
        self.assertEqual(len(errs), 4)
        self.assertAlmostEqual(errs[(lingan.W2, lingan.CLEAN)], math.sqrt(10.), places=9)
        self.assertAlmostEqual(errs[(lingan.W2_SQUARED, lingan.CLEAN)], 10., places=9)
        self.assertAlmostEqual(errs[(lingan.W2, lingan.NOISY)], math.sqrt(11.44), places=9)
        self.assertAlmostEqual(errs[(lingan.W2_SQUARED, lingan.NOISY)], 11.44, places=9)

    def test_rotation_invariance(self):
        g = torch.Generator()
        g.manual_seed(0)
        G = torch.randn(64, 12, generator=g, dtype=torch.float64)
        U = lingan.random_orthonormal_cols(12, 12, g)
        self.assertAlmostEqual(lingan.test_error(G, self.model), lingan.test_error(G @ U, self.model), places=9)

    def test_mismatch(self):
        with self.assertRaises(lingan.InvalidInput):
            lingan.test_error(torch.zeros(8, 2), self.model)
        with self.assertRaises(lingan.InvalidInput):
            lingan.test_error(torch.zeros(64, 2), self.model, convention='kl')


class TestRunTrial(unittest.TestCase):

    def test_pca_constant_beyond_n(self):
        cfg = lingan.ExperimentConfig(variant='pca', trials=1)
        outs = [lingan.run_trial(cfg, None, k, 0, 0) for k in (20, 40, 64, 127)]
        for o in outs:
            self.assertLess(o.train_error, 1e-9)
            self.assertLess(abs(o.test_error - outs[0].test_error), 1e-9)

    def test_pca_underparameterized(self):
        cfg = lingan.ExperimentConfig(variant='pca', trials=1)
        a = lingan.run_trial(cfg, None, 5, 0, 0)
        b = lingan.run_trial(cfg, None, 20, 0, 0)
        self.assertGreater(a.train_error, b.train_error)

    def test_pca_trial_uses_generator(self):
        cfg = small_config(variant='pca')
        model, data = lingan.experiments._trial_setup(cfg, 1)
        for k in (3, 12):
            out = lingan.run_trial(cfg, None, k, 0, 1)
            self.assertEqual(out.test_error, lingan.test_error(lingan.pca_generator(data.x, k), model))
            self.assertEqual((out.iterations, out.stop_reason), (0, 'closed_form'))

    def test_deterministic(self):
        cfg = small_config(variant='ps_plain')
        self.assertEqual(lingan.run_trial(cfg, None, 3, 4, 1), lingan.run_trial(cfg, None, 3, 4, 1))

    def test_trials_differ(self):
        cfg = small_config(variant='ps_plain')
        self.assertNotEqual(lingan.run_trial(cfg, None, 3, 4, 0).test_error,
                            lingan.run_trial(cfg, None, 3, 4, 1).test_error)

    def test_every_variant(self):
        cfg = small_config()
        for variant in lingan.EXPERIMENT_VARIANTS:
            out = lingan.run_trial(cfg, variant, 3, 4, 0)
            self.assertGreaterEqual(out.test_error, 0.)
            self.assertGreaterEqual(out.train_error, 0.)

    def test_invalid(self):
        cfg = small_config()
        with self.assertRaises(lingan.InvalidInput):
            lingan.run_trial(cfg, 'gan', 3, 4, 0)
        with self.assertRaises(lingan.InvalidInput):
            lingan.run_trial(cfg, None, 3, 4, -1)


class TestSweep(unittest.TestCase):

    def test_records(self):
        cfg = small_config(variant='ps_regularized')
        recs = lingan.run_sweep(cfg)
        self.assertEqual(len(recs), len(cfg.k_grid) * len(cfg.n_ps_list))
        self.assertListEqual([(r.n_ps, r.k) for r in recs], sorted((r.n_ps, r.k) for r in recs))
        for r in recs:
            self.assertEqual(r.trials, 2)
            self.assertGreaterEqual(r.test_std, 0.)
            self.assertEqual(r.variant, 'ps_regularized')

    def test_single_trial_zero_std(self):
        recs = lingan.run_sweep(small_config(trials=1, variant='pca', n_ps_list=(0,)))
        for r in recs:
            self.assertEqual((r.test_std, r.train_std, r.iters_std), (0., 0., 0.))

    def test_matches_trials(self):
        cfg = small_config(variant='ps_pinv', k_grid=(3,), n_ps_list=(4,))
        rec = lingan.run_sweep(cfg)[0]
        outs = [lingan.run_trial(cfg, None, 3, 4, t) for t in range(2)]
        self.assertAlmostEqual(rec.test_mean, (outs[0].test_error + outs[1].test_error) / 2, places=12)

    def test_aggregate_order(self):
        outs = [lingan.TrialOutcome(x, 2. * x, 3, 'stalled') for x in (0.1, 0.7, 0.3, 1e-3)]
        a = lingan.aggregate('v', {(1, 0): outs})
        b = lingan.aggregate('v', {(1, 0): outs[::-1]})
        self.assertEqual(a, b)
        self.assertEqual(a[0].iters_std, 0.)

    def test_supervised_random_subset(self):
        cfg = small_config(variant='supervised', k_grid=(1, 3), n_ps_list=(0, 4), subsample='random')
        self.assertEqual(len(lingan.run_sweep(cfg)), 4)

    def test_trial_failure_message(self):
        err = pickle.loads(pickle.dumps(lingan.TrialFailure('ps_plain', 3, 4, 7, 'boom')))
        self.assertEqual((err.k, err.n_ps, err.trial_index), (3, 4, 7))
        self.assertIn('k=3', str(err))
        self.assertIn('trial=7', str(err))


class TestVerify(unittest.TestCase):

    def test_theorem1(self):
        rep = lingan.verify_theorem1(lingan.ExperimentConfig(trials=1), k_list=(20, 64, 127))
        self.assertTrue(rep.passed, msg=str(rep))
        self.assertLess(rep.max_deviation, 1e-9)

    def test_theorem1_single(self):
        self.assertTrue(lingan.verify_theorem1(lingan.ExperimentConfig(), k_list=(64,)).passed)

    def test_theorem1_underparameterized(self):
        cfg = lingan.ExperimentConfig()
        rep = lingan.verify_theorem1(cfg, k_list=(10, 19))
        self.assertTrue(rep.passed)
        line = [l for l in rep.lines if 'over all k' in l][0]
        dev_all = float(line.rsplit(':', 1)[1])
        self.assertGreater(dev_all, 1e-6)
        a, b = (lingan.run_trial(cfg, 'pca', k, 0, 0).test_error for k in (10, 19))
        self.assertAlmostEqual(dev_all, abs(a - b), delta=1e-3 * abs(a - b))

    def test_orthonormal(self):
        self.assertTrue(lingan.verify_orthonormal_invariance(8, 12, 0).passed)
        self.assertTrue(lingan.verify_orthonormal_invariance(6, 1, 0, draws=5).passed)

    def test_pseudometric(self):
        rep = lingan.verify_pseudometric(8, 100, 0)
        self.assertTrue(rep.passed, msg=str(rep))

    def test_concentration(self):
        rep = lingan.verify_concentration(samples=10000, seed=0)
        self.assertTrue(rep.passed, msg=str(rep))
        self.assertEqual(len(rep.lines), 4)


class TestCSV(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.recs = [lingan.SweepRecord('ps_plain', 1, 0, 3, 0.1, 0.2, 1. / 3., 0., 12.0, 1.5),
                     lingan.SweepRecord('ps_plain', 3, 0, 3, 3.1622776601683795, 1e-17, 2.5, 0.5, 500.0, 0.)]

    def tearDown(self):
        shutil.rmtree(self.dir)

    def _read(self, name):
        with open(os.path.join(self.dir, name), 'rb') as f:
            return f.read()

    def test_empty(self):
        lingan.write_csv([], os.path.join(self.dir, 'a.csv'))
        self.assertEqual(self._read('a.csv'), b"variant,k,n_ps,trials,test_mean,test_std,train_mean,train_std,iters_mean,iters_std\n")

    def test_round_trip(self):
        path = os.path.join(self.dir, 'a.csv')
        lingan.write_csv(self.recs, path)
        self.assertEqual(self._read('a.csv').count(b'\n'), 3)
        self.assertNotIn(b'\r', self._read('a.csv'))
        back = lingan.read_csv(path)
        self.assertEqual(back, self.recs)
        lingan.write_csv(back, os.path.join(self.dir, 'b.csv'))
        self.assertEqual(self._read('a.csv'), self._read('b.csv'))

    def test_unwritable(self):
        with self.assertRaises(OSError):
            lingan.write_csv(self.recs, os.path.join(self.dir, 'missing', 'a.csv'))

    def test_panel(self):
        recs = self.recs + [lingan.SweepRecord('ps_plain', 1, 20, 3, 0.5, 0., 0., 0., 1., 0.)]
        path = os.path.join(self.dir, 'p.csv')
        lingan.write_panel_csv(recs, path, 'test')
        lines = self._read('p.csv').decode('utf-8').splitlines()
        self.assertEqual(lines[0], 'k,n0,n0_std,n20,n20_std')
        self.assertEqual(lines[1], '1,0.1,0.2,0.5,0.0')
        self.assertEqual(lines[2], '3,3.1622776601683795,1e-17,,')
        with self.assertRaises(lingan.InvalidInput):
            lingan.write_panel_csv(recs, path, 'loss')


class TestPresets(unittest.TestCase):

    def test_presets(self):
        for name in ('spoon', 'supervised', 'ps1', 'ps2', 'ps-weighted', 'ps-pinv'):
            cfg, panels = lingan.preset_config(name, trials=1)
            self.assertEqual(cfg.trials, 1)
            self.assertIn('test', panels)
        cfg, _ = lingan.preset_config('supervised')
        self.assertLess(cfg.n, cfg.m)
        self.assertEqual(lingan.preset_config('ps-weighted')[0].alpha, 0.98)
        with self.assertRaises(lingan.InvalidInput):
            lingan.preset_config('fig9')


if __name__ == '__main__':
    unittest.main()
