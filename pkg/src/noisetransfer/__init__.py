"""Noise transference: synthesize realistic camera noise, train a conditional
GAN to move noise between levels, and denoise as the zero-level case."""

from .noise_model import (NoiseModelParams, TrainingPair, apply_icrf, apply_crf,
                          bayer_process, compute_noise_level_map,
                          make_awgn_pair, make_training_pair,
                          sample_heterogeneous_noise, sample_noise_params,
                          synthesize_noise)
from .generator import (GeneratorConfig, NoiseTransferGenerator,
                        build_generator, init_parameters, randomization_block)
from .discriminator import (DiscriminatorConfig, PatchDiscriminator,
                            build_discriminator, logit_map_size,
                            receptive_field)
from .losses import (discriminator_loss, generator_adversarial_loss,
                     reconstruction_loss)
from .config import ConfigError, TrainConfig, config_hash, load_config, save_config
from .data import (ManifestError, TrainingSource, dihedral_transform,
                   load_image, read_manifest, save_image, write_manifest)
from .checkpoint import (CheckpointError, load_generator, load_training_state,
                         read_checkpoint, save_checkpoint)
from .training import (Batch, TrainingDiverged, TrainResult, build_batch,
                       run_training, schedule, train_step)
from .evaluation import (denoise, evaluate_pairs, psnr, ssim, transfer_noise,
                         write_report)
from .toy_data import make_toy_dataset, make_toy_image

__version__ = "0.1.0"

__all__ = [
    "NoiseModelParams", "TrainingPair", "apply_icrf", "apply_crf",
    "bayer_process", "compute_noise_level_map", "make_awgn_pair",
    "make_training_pair", "sample_heterogeneous_noise", "sample_noise_params",
    "synthesize_noise",
    "GeneratorConfig", "NoiseTransferGenerator", "build_generator",
    "init_parameters", "randomization_block",
    "DiscriminatorConfig", "PatchDiscriminator", "build_discriminator",
    "logit_map_size", "receptive_field",
    "discriminator_loss", "generator_adversarial_loss", "reconstruction_loss",
    "ConfigError", "TrainConfig", "config_hash", "load_config", "save_config",
    "ManifestError", "TrainingSource", "dihedral_transform", "load_image",
    "read_manifest", "save_image", "write_manifest",
    "CheckpointError", "load_generator", "load_training_state",
    "read_checkpoint", "save_checkpoint",
    "Batch", "TrainingDiverged", "TrainResult", "build_batch", "run_training",
    "schedule", "train_step",
    "denoise", "evaluate_pairs", "psnr", "ssim", "transfer_noise",
    "write_report",
    "make_toy_dataset", "make_toy_image",
]
