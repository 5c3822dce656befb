import lingan
import torch

## Example for lingan v0.1


## Gaussian metrics:
#=======================================
a = lingan.Gaussian([0., 0.], [[1., 0.], [0., 1.]])
b = lingan.Gaussian([3., 4.], [[1., 0.], [0., 1.]])
print(lingan.w2(a, b))              ## 5.0
print(lingan.w2(a, a))              ## 0.0

c = lingan.Gaussian([0., 0.], [[1., 0.], [0., 4.]])
print(lingan.w2_squared(lingan.Gaussian([0., 0.], [[1., 0.], [0., 1.]]), c))

#> ignore the second coordinate
ign = lingan.CoordinateSet([1], d=2)
print(lingan.pseudo_w2(a, b, ign))             ## 3.0
print(lingan.pseudo_w2_zero_padded(a, b, ign)) ## same value

print(lingan.gaussian_kl(lingan.Gaussian([1.], [[2.]]), lingan.Gaussian([0.], [[1.]])))


## Data model:
#=======================================
g = torch.Generator()
g.manual_seed(0)
model = lingan.build_model(64, 10, 0.15)
data = lingan.sample(model, 20, g)
print(data.x.shape, data.z_true.shape)


## PCA closed form: constant test error for k >= n
#=======================================
for k in (5, 10, 20, 64, 127):
    G = lingan.pca_generator(data.x, k)
    print(k, lingan.test_error(G, model))


## Gradient descent on a pseudo-supervised loss:
#=======================================
part = lingan.make_pseudo_partition(data, 12, 40, g)
opts = lingan.GDOptions(max_iters=200)
res = lingan.gd_train(lingan.LossSpec(lingan.PS_PINV), part, 40, opts, g)
print(res.stop_reason, res.iterations, res.final_train_loss)
print(lingan.test_error(res.G, model))


## A small sweep:
#=======================================
cfg = lingan.ExperimentConfig(variant='ps_plain', trials=4, k_grid=(5, 20, 40), n_ps_list=(0, 20),
                              gd=lingan.GDOptions(max_iters=100))
for rec in lingan.run_sweep(cfg):
    print(rec)


## Verification:
#=======================================
print(lingan.verify_theorem1(lingan.ExperimentConfig()))
