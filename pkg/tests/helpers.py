"""Tiny shared builders so the fast tests all agree on a small scale."""

import dataclasses

import numpy as np

from noisetransfer import GeneratorConfig, TrainConfig, TrainingSource
from noisetransfer.toy_data import make_toy_dataset


def tiny_generator_config(**kw):
    base = dict(in_channels=1, channels=8, num_ntb=1, rb_per_ntb=2,
                ca_bottleneck=4, noise_branch_pools=2)
    base.update(kw)
    return GeneratorConfig(**base)


def tiny_train_config(**kw):
    base = dict(total_iters=20, batch_size=2, patch_size=16, lr=1e-3,
                lr_halve_at=10, long_skip_last_iters=5, checkpoint_every=10,
                pairing="awgn", in_channels=1, channels=8, num_ntb=1,
                rb_per_ntb=1, ca_bottleneck=4, noise_branch_pools=2,
                disc_layers=3, disc_base_channels=8, seed=7)
    base.update(kw)
    return TrainConfig(**base)


def tiny_source(count=4, size=24, channels=1, seed=0):
    return TrainingSource(images=make_toy_dataset(seed, count, size=size,
                                                  channels=channels))


def replace(cfg, **kw):
    return dataclasses.replace(cfg, **kw)


def random_image(seed, shape):
    return np.random.default_rng(seed).random(shape)
