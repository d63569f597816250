"""Image I/O, dataset manifests and patch plumbing.

A manifest is a JSON file that freezes a dataset: the entries, the run seed,
the generating config and a hash of that config.  Consumers recompute the
hash before touching any data, so a manifest edited out from under its config
(or vice versa) fails immediately rather than producing subtly wrong science.

Entries come in two flavours.  Paired entries name a source image, a target
image and a stored noise level map; bare entries name a single image and the
training loop corrupts patches of it on the fly.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .config import config_hash
from .noise_model import TrainingPair


class ManifestError(RuntimeError):
    pass


def load_image(path) -> np.ndarray:
    """Read an 8-bit image as float64 in [0, 1]; (H, W) or (H, W, 3)."""
    with Image.open(path) as img:
        if img.mode == "L":
            arr = np.asarray(img, dtype=np.float64)
        else:
            arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def save_image(path, arr: np.ndarray) -> None:
    """Quantise to 8 bits (exit-point clamp included) and write a PNG."""
    arr = np.asarray(arr, dtype=np.float64)
    data = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L" if data.ndim == 2 else "RGB").save(path)


def dihedral_transform(arr: np.ndarray, index: int) -> np.ndarray:
    """Apply one of the eight axis-aligned symmetries to the image plane.

    index 0..3 rotate by 90-degree steps, 4..7 additionally mirror.  Works for
    (H, W) and (H, W, C) arrays; index 0 is the identity.
    """
    if not 0 <= index < 8:
        raise ValueError("dihedral index must be in 0..7")
    out = np.rot90(arr, k=index % 4, axes=(0, 1))
    if index >= 4:
        out = out[:, ::-1]
    return np.ascontiguousarray(out)


@dataclass
class TrainingSource:
    """In-memory dataset: either bare clean-ish images or precomputed pairs."""

    images: list | None = None
    pairs: list | None = None

    def __post_init__(self):
        if (self.images is None) == (self.pairs is None):
            raise ValueError("provide exactly one of images or pairs")
        items = self.images if self.images is not None else [p.source for p in self.pairs]
        if not items:
            raise ValueError("dataset is empty")
        ndims = {a.ndim for a in items}
        if len(ndims) != 1:
            raise ValueError("dataset mixes grayscale and colour images")

    @property
    def kind(self) -> str:
        return "images" if self.images is not None else "pairs"

    @property
    def channels(self) -> int:
        sample = self.images[0] if self.images is not None else self.pairs[0].source
        return 1 if sample.ndim == 2 else sample.shape[2]

    def __len__(self):
        return len(self.images if self.images is not None else self.pairs)


def write_manifest(path, entries, run_seed: int, config_dict: dict) -> None:
    doc = {
        "format": 1,
        "run_seed": int(run_seed),
        "config": config_dict,
        "config_hash": config_hash(config_dict),
        "entries": entries,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    """Load a manifest and verify its config hash before anything else."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key in ("config", "config_hash", "entries"):
        if key not in doc:
            raise ManifestError(f"{path}: manifest missing {key!r}")
    actual = config_hash(doc["config"])
    if actual != doc["config_hash"]:
        raise ManifestError(f"{path}: config hash mismatch (recorded "
                            f"{doc['config_hash'][:12]}, recomputed {actual[:12]}); "
                            "refusing to use a tampered manifest")
    return doc


def load_training_source(manifest: dict, base_dir) -> TrainingSource:
    """Materialise the dataset a manifest describes; missing files are fatal."""
    base = Path(base_dir)
    entries = manifest["entries"]
    if not entries:
        raise ManifestError("manifest has no entries")
    paired = "target" in entries[0]
    if paired:
        pairs = []
        for entry in entries:
            pairs.append(TrainingPair(
                source=load_image(base / entry["source"]),
                target=load_image(base / entry["target"]),
                target_map=np.load(base / entry["map"]),
            ))
        return TrainingSource(pairs=pairs)
    images = [load_image(base / entry["source"]) for entry in entries]
    return TrainingSource(images=images)
