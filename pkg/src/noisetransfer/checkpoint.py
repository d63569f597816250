"""Checkpoints as flat npz archives of named tensors.

Every tensor is stored under its state-dict path ("generator/head.weight",
"adam_g/head.weight/exp_avg", ...) next to a JSON metadata blob carrying the
iteration counter and the configs needed to rebuild the modules.  Loading
rebuilds the module from its config and verifies, path by path, that stored
and expected shapes agree before copying anything, so a truncated or
mismatched archive fails loudly instead of half-loading.
"""

import json

import numpy as np
import torch

from .generator import GeneratorConfig, NoiseTransferGenerator

_META_KEY = "__meta__"


class CheckpointError(RuntimeError):
    pass


def _module_arrays(module, prefix):
    return {f"{prefix}/{path}": tensor.detach().cpu().numpy().copy()
            for path, tensor in module.state_dict().items()}


def _optimizer_arrays(optimizer, module, prefix):
    arrays = {}
    paths = {id(p): path for path, p in module.named_parameters()}
    for group in optimizer.param_groups:
        for p in group["params"]:
            state = optimizer.state.get(p)
            if not state:
                continue
            path = paths[id(p)]
            arrays[f"{prefix}/{path}/step"] = np.asarray(float(state["step"]))
            arrays[f"{prefix}/{path}/exp_avg"] = state["exp_avg"].numpy().copy()
            arrays[f"{prefix}/{path}/exp_avg_sq"] = state["exp_avg_sq"].numpy().copy()
    return arrays


def save_checkpoint(path, *, generator, iteration=0, discriminator=None,
                    optimizer_g=None, optimizer_d=None, train_config=None,
                    extra=None):
    """Write a checkpoint; only the generator is mandatory."""
    arrays = _module_arrays(generator, "generator")
    gen_config = generator.config.to_dict()
    # Record the live long-skip state so reloaded inference matches the
    # behaviour at save time, not at construction time.
    gen_config["long_skip_noise_branch"] = bool(generator.long_skip_active)
    meta = {
        "format": 1,
        "iteration": int(iteration),
        "generator_config": gen_config,
        "discriminator_config": None,
        "train_config": train_config,
        "extra": extra or {},
    }
    if discriminator is not None:
        arrays.update(_module_arrays(discriminator, "discriminator"))
        meta["discriminator_config"] = discriminator.config.to_dict()
    if optimizer_g is not None:
        arrays.update(_optimizer_arrays(optimizer_g, generator, "adam_g"))
    if optimizer_d is not None:
        arrays.update(_optimizer_arrays(optimizer_d, discriminator, "adam_d"))
    arrays[_META_KEY] = np.frombuffer(
        json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def read_checkpoint(path):
    """Return (meta, {key: array}) without building any modules."""
    with np.load(path) as archive:
        arrays = {key: archive[key] for key in archive.files}
    raw = arrays.pop(_META_KEY, None)
    if raw is None:
        raise CheckpointError(f"{path}: not a checkpoint (missing metadata)")
    meta = json.loads(bytes(raw.tobytes()).decode("utf-8"))
    return meta, arrays


def _restore_module(module, arrays, prefix):
    stored = {key[len(prefix) + 1:]: arr for key, arr in arrays.items()
              if key.startswith(prefix + "/") and key.count("/") == 1}
    expected = module.state_dict()
    problems = []
    for path, tensor in expected.items():
        if path not in stored:
            problems.append(f"missing {prefix}/{path} {tuple(tensor.shape)}")
        elif tuple(stored[path].shape) != tuple(tensor.shape):
            problems.append(f"shape {prefix}/{path}: checkpoint "
                            f"{tuple(stored[path].shape)} vs model {tuple(tensor.shape)}")
    for path in stored:
        if path not in expected:
            problems.append(f"unexpected {prefix}/{path}")
    if problems:
        raise CheckpointError("checkpoint does not fit the model:\n  "
                              + "\n  ".join(sorted(problems)))
    with torch.no_grad():
        for path, tensor in expected.items():
            tensor.copy_(torch.from_numpy(stored[path]).to(tensor.dtype))


def _restore_optimizer(optimizer, module, arrays, prefix):
    for path, p in module.named_parameters():
        key = f"{prefix}/{path}/exp_avg"
        if key not in arrays:
            continue
        optimizer.state[p] = {
            "step": torch.tensor(float(arrays[f"{prefix}/{path}/step"])),
            "exp_avg": torch.from_numpy(arrays[key].copy()),
            "exp_avg_sq": torch.from_numpy(arrays[f"{prefix}/{path}/exp_avg_sq"].copy()),
        }


def load_generator(path):
    """Rebuild the generator stored at path; returns (generator, meta)."""
    meta, arrays = read_checkpoint(path)
    config = GeneratorConfig.from_dict(meta["generator_config"])
    gen = NoiseTransferGenerator(config)
    _restore_module(gen, arrays, "generator")
    return gen, meta


def load_training_state(path, generator, discriminator=None,
                        optimizer_g=None, optimizer_d=None):
    """Restore modules and optimizer state in place; returns the metadata."""
    meta, arrays = read_checkpoint(path)
    _restore_module(generator, arrays, "generator")
    if discriminator is not None:
        if meta.get("discriminator_config") is None:
            raise CheckpointError("checkpoint carries no discriminator")
        _restore_module(discriminator, arrays, "discriminator")
    if optimizer_g is not None:
        _restore_optimizer(optimizer_g, generator, arrays, "adam_g")
    if optimizer_d is not None:
        _restore_optimizer(optimizer_d, discriminator, arrays, "adam_d")
    return meta
