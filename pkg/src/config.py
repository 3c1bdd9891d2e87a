"""
Run configuration file (YAML).

Keys are fixed; unknown keys are rejected. Defaults are the full-scale
training values; ``FIELD_PROVENANCE`` records where each default comes from
and is what ``train --help`` / ``train --show-config`` print.
"""

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from dataclasses_json import Undefined, dataclass_json
from dataclasses_json.undefined import UndefinedParameterError

from src.data.models import Modality, synthesis_label
from src.exceptions import ConfigError, DataPipelineError
from src.networks.config import GeneratorConfig
from src.training.config import TrainConfig

logger = logging.getLogger(__name__)

FIELD_PROVENANCE: Dict[str, str] = {
    "modalities": "source modalities; main experiment uses T1+T2",
    "target": "synthesized modality; FLAIR in all reported experiments",
    "image_size": "slices resized to 256x256",
    "laf_block_size": "LAF block size; 128x128 performed best",
    "width_scale": "channel-width multiplier; 1.0 is full scale, 0.25 for desk runs",
    "lambda1": "synthesized-target L1 weight, empirically 0.1",
    "lambda2": "pseudo-target L1 weight, empirically 0.1",
    "lr": "Adam learning rate, fixed at 0.0002 before linear decay",
    "epochs": "200 training epochs",
    "batch_size": "batch size 3",
    "seed": "RNG seed; falls back to MODSYNTH_SEED",
    "data_manifest": "dataset manifest CSV (relative to this config file)",
    "output_dir": "run output directory (relative to MODSYNTH_OUTPUT_ROOT)",
    "decay_start_epoch": "linear decay to 0 starts after epoch 100",
    "keep_count": "80 middle slices per subject after removing empty slices",
    "train_subjects": "126 training subjects, the rest are the test cohort",
    "checkpoint_every": "checkpoint cadence in epochs (0: only the last epoch)",
    "padding_mode": "ResBlock padding, zero or reflect",
    "per_layer_style": "one (mean, std) pair per decoder AdaIN layer instead of one shared pair",
    "device": "torch device",
    "beta1": "Adam beta1 (0.5)",
    "beta2": "Adam beta2 (0.999)",
}


@dataclass_json(undefined=Undefined.RAISE)
@dataclass(frozen=True)
class CliConfig:
    modalities: List[str] = field(default_factory=lambda: ["T1", "T2"])
    target: str = "FLAIR"
    image_size: int = 256
    laf_block_size: int = 128
    width_scale: float = 1.0
    lambda1: float = 0.1
    lambda2: float = 0.1
    lr: float = 2e-4
    epochs: int = 200
    batch_size: int = 3
    seed: int = 0
    data_manifest: str = "data/manifest.csv"
    output_dir: str = "default"
    decay_start_epoch: int = 100
    keep_count: int = 80
    train_subjects: int = 126
    checkpoint_every: int = 10
    padding_mode: str = "zero"
    per_layer_style: bool = False
    device: str = "cpu"
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self):
        sources = self.source_modalities
        if len(set(sources)) != len(sources):
            raise ConfigError(f"Duplicate source modalities: {self.modalities}")
        if self.target_modality in sources:
            raise ConfigError(f"Target {self.target} is also a source modality")
        if self.keep_count < 1 or self.train_subjects < 1:
            raise ConfigError("keep_count and train_subjects must be positive")
        # builds and validates both sub-configs
        self.to_generator_config()
        self.to_train_config()

    @property
    def source_modalities(self) -> Tuple[Modality, ...]:
        if not self.modalities:
            raise ConfigError("At least one source modality is required")
        try:
            return Modality.parse_many(self.modalities)
        except DataPipelineError as e:
            raise ConfigError(str(e)) from e

    @property
    def target_modality(self) -> Modality:
        try:
            return Modality.parse(self.target)
        except DataPipelineError as e:
            raise ConfigError(str(e)) from e

    @property
    def label(self) -> str:
        return synthesis_label(self.source_modalities, self.target_modality)

    def to_generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            modality_count=len(self.modalities),
            image_size=self.image_size,
            laf_block_size=self.laf_block_size,
            width_scale=self.width_scale,
            padding_mode=self.padding_mode,
            per_layer_style=self.per_layer_style,
        )

    def to_train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            base_lr=self.lr,
            decay_start_epoch=self.decay_start_epoch,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            seed=self.seed,
            device=self.device,
            checkpoint_every=self.checkpoint_every,
            beta1=self.beta1,
            beta2=self.beta2,
        )

    def with_overrides(self, **overrides: Any) -> "CliConfig":
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(self, **overrides)

    def describe(self) -> List[str]:
        """``key: value  # provenance`` lines in schema order."""
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name}: {getattr(self, f.name)!r}  # {FIELD_PROVENANCE[f.name]}")
        return lines

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_mapping(cls, data: Optional[Dict[str, Any]], seed_fallback: Optional[int] = None) -> "CliConfig":
        data = dict(data or {})
        if "seed" not in data:
            data["seed"] = seed_fallback if seed_fallback is not None else int(os.environ.get("MODSYNTH_SEED", 0))
        try:
            return cls.from_dict(data)
        except UndefinedParameterError as e:
            known = [f.name for f in dataclasses.fields(cls)]
            unknown = sorted(set(data) - set(known))
            raise ConfigError(f"Unknown config keys: {unknown}") from e

    @classmethod
    def from_file(cls, path: Union[str, Path], seed_fallback: Optional[int] = None) -> "CliConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping of config keys")
        config = cls.from_mapping(data, seed_fallback)
        manifest = Path(config.data_manifest)
        if not manifest.is_absolute():
            config = dataclasses.replace(config, data_manifest=str((path.parent / manifest).resolve()))
        logger.debug("Loaded config %s (%s)", path, config.label)
        return config

    def resolve_output_dir(self, output_root: Union[str, Path]) -> Path:
        out = Path(self.output_dir)
        return out if out.is_absolute() else Path(output_root) / out
