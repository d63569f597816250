"""Alternating adversarial training with counter-based determinism.

Every random choice in a run is drawn from a numpy generator keyed as
(seed, stream, iteration), never from mutable global state.  Batch assembly
and the generator's randomization mask are therefore pure functions of the
configuration and the iteration index, which is what makes two runs
bit-identical and a resumed run indistinguishable from an uninterrupted one:
restoring parameters, optimizer moments and the iteration counter restores
everything.

Each iteration builds a fresh batch, updates the discriminator on (target,
generated) pairs under the same level map, then updates the generator on the
non-saturating adversarial term plus lambda_rec times the reconstruction
term.  The two updates are strictly separated: each optimizer only ever steps
its own module.
"""

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .checkpoint import CheckpointError, load_training_state, save_checkpoint
from .config import ConfigError, TrainConfig
from .data import TrainingSource, dihedral_transform
from .discriminator import build_discriminator
from .generator import build_generator
from .losses import (discriminator_loss, generator_adversarial_loss,
                     reconstruction_loss)
from .noise_model import make_awgn_pair, make_training_pair, sample_noise_params

# Independent randomness streams hanging off the run seed.
STREAM_INIT_G = 1
STREAM_INIT_D = 2
STREAM_BATCH = 3
STREAM_RANDOMIZE = 4


class TrainingDiverged(RuntimeError):
    """A loss or gradient went non-finite; carries the offending metrics."""

    def __init__(self, iteration, metrics):
        super().__init__(f"non-finite training metrics at iteration {iteration}")
        self.iteration = iteration
        self.metrics = metrics


@dataclass
class Batch:
    """Stacked float32 patches, channels-first: (B, C, H, W) and (B, 1, H, W)."""

    sources: np.ndarray
    targets: np.ndarray
    maps: np.ndarray


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    start_iteration: int
    end_iteration: int


def schedule(iteration: int, cfg: TrainConfig):
    """(learning rate, long-skip active) for one iteration.

    The rate halves at lr_halve_at inclusive; the noise-branch long skip
    switches on for the final long_skip_last_iters iterations.
    """
    if not 0 <= iteration < cfg.total_iters:
        raise ValueError(f"iteration {iteration} outside [0, {cfg.total_iters})")
    lr = cfg.lr * (0.5 if iteration >= cfg.lr_halve_at else 1.0)
    long_skip = iteration >= cfg.total_iters - cfg.long_skip_last_iters
    return lr, long_skip


def _chw(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return arr[None, :, :]
    return np.moveaxis(arr, 2, 0)


def _sample_sigma(rng, high: float) -> float:
    # Uniform on (0, high]: zero noise is an inference-only condition.
    return high * (1.0 - rng.random())


def _crop(arr: np.ndarray, top: int, left: int, size: int) -> np.ndarray:
    return arr[top:top + size, left:left + size]


def build_batch(source: TrainingSource, cfg: TrainConfig, iteration: int,
                seed=None) -> Batch:
    """Assemble one training batch, a pure function of (seed, iteration).

    Per item, in fixed draw order: dataset index, crop corner, dihedral
    symmetry, then the corruption draws.  Bare images are corrupted on the
    fly by the configured pairing; precomputed pairs are cropped and
    augmented as stored.  Under n2c the target is the clean patch and the
    map is zero.
    """
    if seed is None:
        seed = cfg.seed
    rng = np.random.default_rng([seed, STREAM_BATCH, iteration])
    ps = cfg.patch_size
    sources, targets, maps = [], [], []
    for _ in range(cfg.batch_size):
        idx = int(rng.integers(len(source)))
        ref = source.images[idx] if source.kind == "images" else source.pairs[idx].source
        h, w = ref.shape[:2]
        if h < ps or w < ps:
            raise ValueError(f"dataset item {idx} is {h}x{w}, smaller than "
                             f"the {ps}x{ps} patch size")
        top = int(rng.integers(h - ps + 1))
        left = int(rng.integers(w - ps + 1))
        flip = int(rng.integers(8))

        if source.kind == "pairs":
            pair = source.pairs[idx]
            y = dihedral_transform(_crop(pair.source, top, left, ps), flip)
            z = dihedral_transform(_crop(pair.target, top, left, ps), flip)
            m = dihedral_transform(_crop(pair.target_map, top, left, ps), flip)
        else:
            clean = dihedral_transform(_crop(ref, top, left, ps), flip)
            if cfg.pairing == "camera":
                params = sample_noise_params(
                    rng, cfg.sigma_s_max, cfg.sigma_c_max,
                    crf_gamma=cfg.crf_gamma, enable_crf=cfg.enable_crf,
                    enable_bpd=cfg.enable_bpd, bayer_pattern=cfg.bayer_pattern)
                pair = make_training_pair(clean, params, rng)
            else:
                sigma_y = _sample_sigma(rng, cfg.awgn_sigma_max)
                sigma_z = _sample_sigma(rng, cfg.awgn_sigma_max)
                pair = make_awgn_pair(clean, sigma_y, sigma_z, rng)
            y, z, m = pair.source, pair.target, pair.target_map
            if cfg.n2c:
                z = clean
                m = np.zeros_like(m)

        sources.append(_chw(y))
        targets.append(_chw(z))
        maps.append(m[None, :, :])

    return Batch(sources=np.stack(sources).astype(np.float32),
                 targets=np.stack(targets).astype(np.float32),
                 maps=np.stack(maps).astype(np.float32))


def _grad_norm(module) -> float:
    total = 0.0
    for p in module.parameters():
        if p.grad is not None:
            total += float(p.grad.pow(2).sum())
    return math.sqrt(total)


def discriminator_step(disc, opt_d, maps_t, real_t, fake_detached):
    """One discriminator update; touches no generator parameter."""
    opt_d.zero_grad(set_to_none=True)
    loss = discriminator_loss(disc(maps_t, real_t), disc(maps_t, fake_detached))
    loss.backward()
    norm = _grad_norm(disc)
    opt_d.step()
    return {"loss_d": loss.item(), "grad_norm_d": norm}


def generator_step(gen, disc, opt_g, cfg, fake, targets_t, maps_t):
    """One generator update on a generated batch already in the graph.

    The total objective is exactly adversarial + lambda_rec * reconstruction
    (reconstruction alone under no_gan).  Backprop reaches the discriminator's
    parameters but only the generator's optimizer steps.
    """
    opt_g.zero_grad(set_to_none=True)
    rec = reconstruction_loss(fake, targets_t)
    if cfg.no_gan:
        total = rec
        parts = {"loss_g": total.item(), "loss_rec": rec.item()}
    else:
        adv = generator_adversarial_loss(disc(maps_t, fake))
        total = adv + cfg.lambda_rec * rec
        parts = {"loss_g": total.item(), "loss_adv": adv.item(),
                 "loss_rec": rec.item()}
    total.backward()
    parts["grad_norm_g"] = _grad_norm(gen)
    opt_g.step()
    return parts


def train_step(gen, disc, opt_g, opt_d, batch: Batch, cfg: TrainConfig,
               iteration: int, seed=None) -> dict:
    """One full alternating update (discriminator first, 1:1 with generator)."""
    if seed is None:
        seed = cfg.seed
    lr, long_skip = schedule(iteration, cfg)
    for opt in (opt_g, opt_d):
        if opt is not None:
            for group in opt.param_groups:
                group["lr"] = lr
    gen.long_skip_active = long_skip

    y = torch.from_numpy(batch.sources)
    z = torch.from_numpy(batch.targets)
    m = torch.from_numpy(batch.maps)
    rng = np.random.default_rng([seed, STREAM_RANDOMIZE, iteration])
    fake = gen(y, m, mode="train", rng=rng)

    metrics = {"iteration": iteration, "lr": lr,
               "map_mean": float(batch.maps.mean())}
    if not cfg.no_gan:
        metrics.update(discriminator_step(disc, opt_d, m, z, fake.detach()))
    metrics.update(generator_step(gen, disc, opt_g, cfg, fake, z, m))

    if not all(math.isfinite(v) for k, v in metrics.items() if k != "iteration"):
        raise TrainingDiverged(iteration, metrics)
    return metrics


def _generator_config_now(gen):
    return dataclasses.replace(gen.config,
                               long_skip_noise_branch=bool(gen.long_skip_active))


def _preflight(cfg: TrainConfig, source: TrainingSource):
    if source.channels != cfg.in_channels:
        raise ConfigError(f"dataset has {source.channels} channel(s) but the "
                          f"config says in_channels = {cfg.in_channels}")
    if cfg.n2c and source.kind == "pairs":
        raise ConfigError("n2c needs clean reference images; precomputed "
                          "noisy pairs provide none")
    if (source.kind == "images" and cfg.pairing == "camera" and cfg.enable_bpd
            and cfg.in_channels == 3 and cfg.patch_size % 2):
        raise ConfigError("colour camera-pipeline synthesis needs an even "
                          "patch size for the Bayer stage")


def run_training(cfg: TrainConfig, source: TrainingSource, out_dir,
                 resume_from=None, log=None) -> TrainResult:
    """Run (or resume) a full training job in out_dir.

    Writes metrics.jsonl (one JSON object per iteration), numbered
    checkpoints every checkpoint_every iterations and checkpoint_final.npz.
    On a non-finite loss the run aborts, leaving divergence.json next to the
    metrics for post-mortem work.
    """
    _preflight(cfg, source)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    gen = build_generator(cfg.generator_config(), [cfg.seed, STREAM_INIT_G])
    betas = (cfg.adam_beta1, cfg.adam_beta2)
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr, betas=betas)
    disc = opt_d = None
    if not cfg.no_gan:
        disc = build_discriminator(cfg.discriminator_config(),
                                   [cfg.seed, STREAM_INIT_D])
        opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr, betas=betas)

    start = 0
    if resume_from is not None:
        meta = load_training_state(resume_from, gen, disc, opt_g, opt_d)
        stored = dict(meta["generator_config"], long_skip_noise_branch=False)
        if stored != cfg.generator_config().to_dict():
            raise CheckpointError("checkpoint generator config does not match "
                                  "this run's config")
        start = int(meta["iteration"])
        if start >= cfg.total_iters:
            raise ConfigError(f"checkpoint is already at iteration {start}, "
                              f"nothing left of the {cfg.total_iters} requested")

    metrics_path = out / "metrics.jsonl"
    final_path = out / "checkpoint_final.npz"

    def save(path, upto):
        save_checkpoint(path, generator=gen, iteration=upto, discriminator=disc,
                        optimizer_g=opt_g, optimizer_d=opt_d,
                        train_config=cfg.to_dict())

    with open(metrics_path, "a" if start else "w", encoding="utf-8") as fh:
        for it in range(start, cfg.total_iters):
            batch = build_batch(source, cfg, it)
            try:
                metrics = train_step(gen, disc, opt_g, opt_d, batch, cfg, it)
            except TrainingDiverged as exc:
                fh.flush()
                dump = {"iteration": exc.iteration, "metrics": exc.metrics,
                        "config": cfg.to_dict()}
                with open(out / "divergence.json", "w", encoding="utf-8") as dh:
                    json.dump(dump, dh, indent=2, sort_keys=True, default=str)
                raise
            fh.write(json.dumps(metrics, sort_keys=True) + "\n")
            done = it + 1
            if done == cfg.total_iters:
                save(final_path, done)
            elif done % cfg.checkpoint_every == 0:
                save(out / f"checkpoint_{done:06d}.npz", done)
                fh.flush()
            if log is not None and (done % max(1, cfg.checkpoint_every) == 0
                                    or done == cfg.total_iters):
                log(f"iter {done}/{cfg.total_iters} "
                    f"loss_g={metrics['loss_g']:.4f} "
                    f"rec={metrics['loss_rec']:.5f}")

    return TrainResult(checkpoint_path=final_path, metrics_path=metrics_path,
                       start_iteration=start, end_iteration=cfg.total_iters)
