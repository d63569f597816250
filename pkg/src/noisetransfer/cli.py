"""Command line front end.

    noisetransfer synthesize --images DIR --out-dir DIR [--config FILE] [--seed N]
    noisetransfer train --manifest FILE --out-dir DIR [--config FILE] [--resume CKPT]
    noisetransfer denoise --checkpoint CKPT --inputs IMG... --out-dir DIR
    noisetransfer transfer --checkpoint CKPT --inputs IMG... --map-spec V --out-dir DIR
    noisetransfer eval --manifest FILE --out-dir DIR [--checkpoint CKPT]
    noisetransfer ablate --manifest FILE --out-dir DIR [--config FILE] [--iters N]

Exit codes: 0 success, 1 configuration or input problems, 2 training
divergence.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, load_generator
from .config import ConfigError, TrainConfig, load_config
from .data import (ManifestError, load_image, load_training_source,
                   read_manifest, save_image, write_manifest)
from .evaluation import denoise, evaluate_pairs, transfer_noise, write_report
from .noise_model import make_awgn_pair, make_training_pair, sample_noise_params
from .training import TrainingDiverged, run_training

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

# One row per ablation: every switch combination the flag matrix needs.
ABLATION_ROWS = (
    ("gan_only", {"no_ror": True, "no_ca": True, "no_sa": True}),
    ("gan_ror", {"no_ca": True, "no_sa": True}),
    ("gan_ror_ca", {"no_sa": True}),
    ("gan_ror_sa", {"no_ca": True}),
    ("gan_ca_sa", {"no_ror": True}),
    ("rec_only", {"no_gan": True}),
    ("full", {}),
    ("n2c", {"n2c": True}),
    ("n2n", {"n2n": True}),
)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _load_cfg(args) -> TrainConfig:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if args.config is not None:
        return load_config(args.config, overrides)
    return TrainConfig(**overrides)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synthesize(args) -> int:
    cfg = _load_cfg(args)
    out = _out_dir(args)
    image_dir = Path(args.images)
    paths = sorted(p for p in image_dir.iterdir()
                   if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise ConfigError(f"no images found under {image_dir}")

    rng = np.random.default_rng([cfg.seed, 31])
    ps = cfg.patch_size
    entries = []
    for path in paths:
        try:
            image = load_image(path)
        except OSError as exc:
            _warn(f"skipping unreadable image {path}: {exc}")
            continue
        if image.shape[0] < ps or image.shape[1] < ps:
            _warn(f"skipping {path}: smaller than the {ps}x{ps} patch size")
            continue
        for _ in range(cfg.patches_per_image):
            top = int(rng.integers(image.shape[0] - ps + 1))
            left = int(rng.integers(image.shape[1] - ps + 1))
            patch = image[top:top + ps, left:left + ps]
            pair_seed = int(rng.integers(2 ** 31))
            index = len(entries)
            entry = {"source": f"pair_{index:05d}_source.png",
                     "target": f"pair_{index:05d}_target.png",
                     "map": f"pair_{index:05d}_map.npy",
                     "seed": pair_seed}
            if cfg.pairing == "camera":
                params = sample_noise_params(
                    rng, cfg.sigma_s_max, cfg.sigma_c_max,
                    crf_gamma=cfg.crf_gamma, enable_crf=cfg.enable_crf,
                    enable_bpd=cfg.enable_bpd, bayer_pattern=cfg.bayer_pattern)
                pair = make_training_pair(patch, params, pair_seed)
                entry["sigma_s"] = params.sigma_s
                entry["sigma_c"] = params.sigma_c
            else:
                sigma_y = cfg.awgn_sigma_max * (1.0 - rng.random())
                sigma_z = cfg.awgn_sigma_max * (1.0 - rng.random())
                pair = make_awgn_pair(patch, sigma_y, sigma_z, pair_seed)
                entry["sigma_y"] = sigma_y
                entry["sigma_z"] = sigma_z
            save_image(out / entry["source"], pair.source)
            save_image(out / entry["target"], pair.target)
            np.save(out / entry["map"], pair.target_map.astype(np.float32))
            entries.append(entry)

    if not entries:
        raise ConfigError("no usable images; nothing synthesized")
    write_manifest(out / "manifest.json", entries, cfg.seed, cfg.to_dict())
    print(f"wrote {len(entries)} pairs and manifest.json to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    out = _out_dir(args)
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    source = load_training_source(manifest, manifest_path.parent)
    try:
        result = run_training(cfg, source, out, resume_from=args.resume,
                              log=print)
    except TrainingDiverged as exc:
        print(f"error: {exc}; diagnostics in {out / 'divergence.json'}",
              file=sys.stderr)
        return 2
    print(f"final checkpoint: {result.checkpoint_path}")
    return 0


def _generator_from_args(args):
    gen, meta = load_generator(args.checkpoint)
    if args.config is not None:
        cfg = load_config(args.config)
        wanted = dict(cfg.generator_config().to_dict(), long_skip_noise_branch=None)
        stored = dict(meta["generator_config"], long_skip_noise_branch=None)
        if wanted != stored:
            diff = [f"  {k}: config {wanted[k]!r} vs checkpoint {stored[k]!r}"
                    for k in sorted(wanted) if wanted[k] != stored[k]]
            raise CheckpointError(
                "checkpoint was trained with a different generator config:\n"
                + "\n".join(diff))
    return gen


def cmd_denoise(args) -> int:
    gen = _generator_from_args(args)
    out = _out_dir(args)
    for path in args.inputs:
        path = Path(path)
        restored = denoise(load_image(path), gen)
        target = out / f"{path.stem}_denoised.png"
        save_image(target, restored)
        print(target)
    return 0


def cmd_transfer(args) -> int:
    gen = _generator_from_args(args)
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    for i, path in enumerate(args.inputs):
        path = Path(path)
        image = load_image(path)
        if args.map_spec.endswith(".npy"):
            level_map = np.load(args.map_spec).astype(np.float64)
        else:
            try:
                value = float(args.map_spec)
            except ValueError:
                raise ConfigError(f"--map-spec must be a number or a .npy "
                                  f"file, got {args.map_spec!r}") from None
            if value < 0:
                raise ConfigError("--map-spec must be non-negative")
            level_map = np.full(image.shape[:2], value)
        result = transfer_noise(image, level_map, gen, [seed, i])
        target = out / f"{path.stem}_transfer.png"
        save_image(target, result)
        np.save(out / f"{path.stem}_map.npy", level_map.astype(np.float32))
        print(target)
    return 0


def cmd_eval(args) -> int:
    out = _out_dir(args)
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    gen = load_generator(args.checkpoint)[0] if args.checkpoint else None
    result = evaluate_pairs(manifest["entries"], gen, manifest_path.parent)
    report = out / "report.csv"
    write_report(report, result)
    print(f"mean psnr {result['mean_psnr']:.3f} dB, "
          f"mean ssim {result['mean_ssim']:.4f} -> {report}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _load_cfg(args)
    out = _out_dir(args)
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    source = load_training_source(manifest, manifest_path.parent)
    iters = args.iters
    summary = []
    for name, flags in ABLATION_ROWS:
        switches = dict(no_gan=False, no_ror=False, no_ca=False, no_sa=False,
                        n2c=False, n2n=False)
        switches.update(flags)
        run_cfg = dataclasses.replace(
            cfg, total_iters=iters, lr_halve_at=iters // 2,
            long_skip_last_iters=max(1, iters // 4),
            checkpoint_every=iters, **switches)
        run_dir = out / name
        print(f"[{name}] " + (" ".join(sorted(flags)) or "all components on"))
        result = run_training(run_cfg, source, run_dir)
        summary.append({"name": name, "flags": flags,
                        "out_dir": str(run_dir),
                        "checkpoint": str(result.checkpoint_path),
                        "metrics": str(result.metrics_path)})
    with open(out / "ablation_summary.json", "w", encoding="utf-8") as fh:
        json.dump({"iters": iters, "runs": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"completed {len(summary)} ablation runs -> {out / 'ablation_summary.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisetransfer",
        description="Camera-noise synthesis, noise-transference training, "
                    "denoising and controllable noise generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="override the run seed")
    common.add_argument("--out-dir", required=True, help="output directory")

    p = sub.add_parser("synthesize", parents=[common],
                       help="corrupt clean images into paired patches + maps")
    p.add_argument("--images", required=True, help="directory of clean images")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("train", parents=[common],
                       help="train (or resume) on a synthesized or bare manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("denoise", parents=[common],
                       help="blind-denoise images with a trained model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--inputs", required=True, nargs="+")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("transfer", parents=[common],
                       help="re-noise images at a chosen level map")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--inputs", required=True, nargs="+")
    p.add_argument("--map-spec", required=True,
                   help="constant level (e.g. 0.1) or a .npy map file")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("eval", parents=[common],
                       help="score (noisy, reference) pairs into a CSV report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", help="omit to score the noisy inputs as-is")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", parents=[common],
                       help="run the component-ablation grid at a small budget")
    p.add_argument("--manifest", required=True)
    p.add_argument("--iters", type=int, default=500)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ManifestError, CheckpointError, OSError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
