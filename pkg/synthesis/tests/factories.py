"""Small on-disk fixtures shared by the slower tests."""

from pathlib import Path
from typing import Any

from src.config import CliConfig
from src.phantom.generator import PhantomSpec, write_dataset

TINY_SIZE = 32


def tiny_phantom(root: Path, subjects: int = 4, depth: int = 12, seed: int = 0, fmt: str = "nifti"):
    spec = PhantomSpec(seed=seed, subject_count=subjects, depth=depth, height=TINY_SIZE, width=TINY_SIZE, shape_count=3)
    return write_dataset(spec, Path(root), fmt=fmt)


def tiny_config(manifest_path: Path, output_dir: Path, **overrides: Any) -> CliConfig:
    values = dict(
        modalities=["T1", "T2"],
        target="FLAIR",
        image_size=TINY_SIZE,
        laf_block_size=16,
        width_scale=0.25,
        epochs=1,
        decay_start_epoch=1,
        batch_size=2,
        keep_count=4,
        train_subjects=3,
        checkpoint_every=1,
        seed=0,
        data_manifest=str(manifest_path),
        output_dir=str(output_dir),
    )
    values.update(overrides)
    return CliConfig.from_mapping(values)
