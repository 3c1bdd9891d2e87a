"""
Checkpoint container: ``torch.save`` of a plain dict carrying the format
tag, config snapshots, seed, epoch and state dicts.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import torch

from src.exceptions import CheckpointError
from src.networks.config import DiscriminatorConfig, GeneratorConfig
from src.networks.discriminator import Discriminator
from src.networks.generator import Generator

logger = logging.getLogger(__name__)

FORMAT_VERSION = "modsynth-ckpt/1"
REQUIRED_KEYS = ("format_version", "generator_config", "seed", "epoch", "generator_state")


def checkpoint_name(epoch: int) -> str:
    return f"epoch_{epoch}.ckpt"


@dataclass
class Checkpoint:
    generator_config: GeneratorConfig
    seed: int
    epoch: int
    generator_state: Dict[str, Any]
    discriminator_config: Optional[DiscriminatorConfig] = None
    discriminator_state: Optional[Dict[str, Any]] = None
    train_config: Dict[str, Any] = field(default_factory=dict)
    optimizer_states: Dict[str, Any] = field(default_factory=dict)
    modalities: Optional[Dict[str, Any]] = None

    def build_generator(self, device: str = "cpu") -> Generator:
        generator = Generator(self.generator_config)
        try:
            generator.load_state_dict(self.generator_state)
        except RuntimeError as e:
            raise CheckpointError(f"Generator weights do not fit the stored config: {e}") from e
        return generator.to(device).eval()

    def build_discriminator(self, device: str = "cpu") -> Discriminator:
        if self.discriminator_config is None or self.discriminator_state is None:
            raise CheckpointError("Checkpoint has no discriminator")
        discriminator = Discriminator(self.discriminator_config)
        discriminator.load_state_dict(self.discriminator_state)
        return discriminator.to(device)


def save_checkpoint(
    path: Union[str, Path],
    generator: Generator,
    seed: int,
    epoch: int,
    discriminator: Optional[Discriminator] = None,
    train_config: Optional[Dict[str, Any]] = None,
    optimizer_states: Optional[Dict[str, Any]] = None,
    modalities: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    payload = {
        "format_version": FORMAT_VERSION,
        "generator_config": generator.config.to_dict(),
        "seed": int(seed),
        "epoch": int(epoch),
        "generator_state": generator.state_dict(),
        "train_config": dict(train_config or {}),
        "optimizer_states": dict(optimizer_states or {}),
        "modalities": modalities,
    }
    if discriminator is not None:
        payload["discriminator_config"] = discriminator.config.to_dict()
        payload["discriminator_state"] = discriminator.state_dict()

    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(payload, tmp)
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointError(f"Failed to write checkpoint {path}: {e}") from e
    logger.info("Saved checkpoint %s (epoch %d)", path, epoch)
    return path


def load_checkpoint(
    path: Union[str, Path],
    expected: Optional[GeneratorConfig] = None,
    map_location: str = "cpu",
) -> Checkpoint:
    """Read and validate a checkpoint; ``expected`` must match the stored generator config."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location=map_location, weights_only=False)
    except Exception as e:
        raise CheckpointError(f"Unreadable checkpoint {path}: {e}") from e

    if not isinstance(payload, dict):
        raise CheckpointError(f"{path} is not a checkpoint container")
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format {payload.get('format_version')!r}, expected {FORMAT_VERSION}"
        )
    missing = [k for k in REQUIRED_KEYS if k not in payload]
    if missing:
        raise CheckpointError(f"{path}: missing keys {missing}")

    try:
        generator_config = GeneratorConfig.from_dict(payload["generator_config"])
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"{path}: invalid generator config: {e}") from e
    if expected is not None:
        mismatches = expected.mismatches(generator_config)
        if mismatches:
            raise CheckpointError(f"{path}: config mismatch: {'; '.join(mismatches)}")

    discriminator_config = None
    if payload.get("discriminator_config"):
        discriminator_config = DiscriminatorConfig.from_dict(payload["discriminator_config"])

    return Checkpoint(
        generator_config=generator_config,
        seed=payload["seed"],
        epoch=payload["epoch"],
        generator_state=payload["generator_state"],
        discriminator_config=discriminator_config,
        discriminator_state=payload.get("discriminator_state"),
        train_config=payload.get("train_config", {}),
        optimizer_states=payload.get("optimizer_states", {}),
        modalities=payload.get("modalities"),
    )
