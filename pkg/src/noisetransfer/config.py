"""Run configuration: one flat dataclass, one flat text format.

Config files are plain "key = value" lines (# comments and blank lines
allowed).  The schema is derived from the dataclass fields, values are parsed
by the field's type, and unknown keys are rejected, so a typo cannot silently
fall back to a default.
"""

import hashlib
from dataclasses import dataclass, fields, asdict

from .generator import GeneratorConfig
from .discriminator import DiscriminatorConfig
from .noise_model import SIGMA_S_MAX, SIGMA_C_MAX, AWGN_SIGMA_MAX, BAYER_PATTERNS

PAIRINGS = ("camera", "awgn")


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    # optimisation
    total_iters: int = 10_000
    batch_size: int = 16
    patch_size: int = 64
    lr: float = 1e-4
    lr_halve_at: int = 5_000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    lambda_rec: float = 0.3
    seed: int = 0
    long_skip_last_iters: int = 3_000
    checkpoint_every: int = 1_000

    # data and noise synthesis
    pairing: str = "camera"
    patches_per_image: int = 4
    sigma_s_max: float = SIGMA_S_MAX
    sigma_c_max: float = SIGMA_C_MAX
    awgn_sigma_max: float = AWGN_SIGMA_MAX
    crf_gamma: float = 2.2
    enable_crf: bool = True
    enable_bpd: bool = True
    bayer_pattern: str = "RGGB"

    # ablation switches
    no_gan: bool = False
    no_ror: bool = False
    no_ca: bool = False
    no_sa: bool = False
    n2c: bool = False
    n2n: bool = False

    # model size
    in_channels: int = 1
    channels: int = 64
    num_ntb: int = 4
    rb_per_ntb: int = 4
    ca_bottleneck: int = 4
    noise_branch_pools: int = 2
    disc_layers: int = 4
    disc_base_channels: int = 64

    def __post_init__(self):
        if self.total_iters < 1:
            raise ConfigError("total_iters must be positive")
        if self.batch_size < 1 or self.patch_size < 1:
            raise ConfigError("batch_size and patch_size must be positive")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if not 0 <= self.lr_halve_at:
            raise ConfigError("lr_halve_at must be non-negative")
        if self.lambda_rec < 0:
            raise ConfigError("lambda_rec must be non-negative")
        if self.pairing not in PAIRINGS:
            raise ConfigError(f"pairing must be one of {PAIRINGS}")
        if self.bayer_pattern not in BAYER_PATTERNS:
            raise ConfigError(f"bayer_pattern must be one of {BAYER_PATTERNS}")
        if self.n2c and self.n2n:
            raise ConfigError("n2c and n2n are mutually exclusive")
        for name in ("sigma_s_max", "sigma_c_max", "awgn_sigma_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.in_channels not in (1, 3):
            raise ConfigError("in_channels must be 1 or 3")

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            in_channels=self.in_channels,
            channels=self.channels,
            num_ntb=self.num_ntb,
            rb_per_ntb=self.rb_per_ntb,
            ca_bottleneck=self.ca_bottleneck,
            noise_branch_pools=self.noise_branch_pools,
            use_noise_branch=not self.n2n,
            use_sa=not self.no_sa,
            use_ca=not self.no_ca,
            use_ror=not self.no_ror,
        )

    def discriminator_config(self) -> DiscriminatorConfig:
        return DiscriminatorConfig(
            in_channels=self.in_channels,
            layers=self.disc_layers,
            base_channels=self.disc_base_channels,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_PARSERS = {
    int: int,
    float: float,
    str: str,
    bool: lambda s: {"true": True, "false": False, "1": True, "0": False,
                     "yes": True, "no": False}[s.lower()],
}


def parse_config_text(text: str, overrides: dict | None = None) -> TrainConfig:
    schema = {f.name: f.type for f in fields(TrainConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        ftype = schema[key]
        if isinstance(ftype, str):
            ftype = {"int": int, "float": float, "str": str, "bool": bool}[ftype]
        try:
            values[key] = _PARSERS[ftype](value)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if overrides:
        for key, value in overrides.items():
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    return TrainConfig(**values)


def load_config(path, overrides: dict | None = None) -> TrainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), overrides)


def save_config(path, config: TrainConfig) -> None:
    lines = [f"{name} = {value}" for name, value in config.to_dict().items()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def config_hash(config) -> str:
    """Stable digest of a config (dataclass or plain dict)."""
    d = config.to_dict() if hasattr(config, "to_dict") else dict(config)
    canonical = "\n".join(f"{k}={d[k]!r}" for k in sorted(d))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
