import io
import os
import shutil
import tempfile
import unittest
from context import lingan

SMALL = """d = 16
m = 3
n = 8
trials = 2
k_grid = 1, 3, 8
n_ps_list = 0, 4
max_iters = 10
"""


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = lingan.cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


class TestCLI(unittest.TestCase):

    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.dir)

    def _config(self, text):
        path = os.path.join(self.dir, 'run.cfg')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_check_gradients(self):
        code, out, _ = run('check-gradients', '--seed', '3', '--cases', '5')
        self.assertEqual(code, lingan.cli.EXIT_OK, msg=out)
        for variant in lingan.VARIANTS:
            self.assertIn(variant, out)
        self.assertIn('reported only', out)
        self.assertEqual(out.count(' median '), len(lingan.VARIANTS))

    def test_verify_pseudometric(self):
        code, out, _ = run('verify', '--suite', 'pseudometric', '--trials', '20', '--seed', '1')
        self.assertEqual(code, lingan.cli.EXIT_OK, msg=out)

    def test_verify_orthonormal(self):
        code, out, _ = run('verify', '--suite', 'orthonormal', '--trials', '10')
        self.assertEqual(code, lingan.cli.EXIT_OK, msg=out)

    def test_verify_theorem1(self):
        code, out, err = run('verify', '--suite', 'theorem1', '--config', self._config(SMALL + "variant = pca\n"))
        self.assertEqual(code, lingan.cli.EXIT_OK, msg=out)
        self.assertIn('k >= n', out)

    def test_sweep(self):
        path = os.path.join(self.dir, 'out.csv')
        code, out, err = run('sweep', '--config', self._config(SMALL), '--out', path)
        self.assertEqual(code, lingan.cli.EXIT_OK, msg=err)
        self.assertIn('# resolved config', err)
        recs = lingan.read_csv(path)
        self.assertEqual(len(recs), 6)
        self.assertTrue(all(r.variant == 'ps_plain' for r in recs))

    def test_sweep_workers_flag(self):
        path = os.path.join(self.dir, 'out.csv')
        code, _, err = run('sweep', '--config', self._config(SMALL), '--out', path, '--workers', '1')
        self.assertEqual(code, lingan.cli.EXIT_OK)
        self.assertIn('workers = 1', err)

    def test_bad_key(self):
        code, _, err = run('sweep', '--config', self._config("colour = red\n"), '--out',
                           os.path.join(self.dir, 'out.csv'))
        self.assertEqual(code, lingan.cli.EXIT_CONFIG)
        self.assertIn('colour', err)

    def test_missing_config(self):
        code, _, _ = run('sweep', '--config', os.path.join(self.dir, 'nope.cfg'), '--out',
                         os.path.join(self.dir, 'out.csv'))
        self.assertEqual(code, lingan.cli.EXIT_CONFIG)

    def test_unwritable_output(self):
        code, _, err = run('sweep', '--config', self._config(SMALL), '--out',
                           os.path.join(self.dir, 'missing', 'out.csv'))
        self.assertEqual(code, lingan.cli.EXIT_RUNTIME)
        self.assertIn('error', err)

    def test_demo(self):
        out_dir = os.path.join(self.dir, 'spoon')
        code, out, _ = run('demo', '--figure', 'spoon', '--trials', '1', '--out', out_dir)
        self.assertEqual(code, lingan.cli.EXIT_OK)
        for name in ('spoon.csv', 'spoon_train.csv', 'spoon_test.csv'):
            self.assertTrue(os.path.exists(os.path.join(out_dir, name)), msg=name)
        self.assertEqual(len(lingan.read_csv(os.path.join(out_dir, 'spoon.csv'))), 40)

    def test_usage(self):
        with self.assertRaises(SystemExit):
            run('verify')
        with self.assertRaises(SystemExit):
            run('demo', '--figure', 'fig9', '--out', self.dir)


if __name__ == '__main__':
    unittest.main()
