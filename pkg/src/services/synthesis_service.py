import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import torch

from src.data.models import NormalizationParams
from src.data.pipeline import resize_slice
from src.data.volume_io import read_slice, write_unit_slice
from src.exceptions import CheckpointError, ConfigError
from src.metrics.image_quality import to_unit_range
from src.networks.checkpoint import Checkpoint, load_checkpoint

logger = logging.getLogger(__name__)

SYNTHESIZED_FILE = "synthesized.png"
PSEUDO_TARGET_FILE = "pseudo_target.png"


class SynthesisService:
    """Inference from a checkpoint: M source slice files -> synthesized target PNG."""

    def __init__(self, checkpoint: Union[str, Path, Checkpoint], device: str = "cpu"):
        self.checkpoint = checkpoint if isinstance(checkpoint, Checkpoint) else load_checkpoint(checkpoint)
        self.device = device
        self.generator = self.checkpoint.build_generator(device)

    @property
    def config(self):
        return self.checkpoint.generator_config

    def prepare_inputs(
        self,
        input_paths: Sequence[Union[str, Path]],
        normalization: Optional[Sequence[NormalizationParams]] = None,
    ) -> torch.Tensor:
        """
        Resize and map each slice onto [-1, 1].

        Training scales by the min/max of the whole source volume; pass those
        bounds as ``normalization`` to reproduce it. Without them each slice is
        scaled by its own min/max.
        """
        expected = self.config.modality_count
        if len(input_paths) != expected:
            sources = (self.checkpoint.modalities or {}).get("sources")
            hint = f" ({', '.join(sources)})" if sources else ""
            raise CheckpointError(
                f"Checkpoint expects {expected} input slice(s){hint}, got {len(input_paths)}"
            )
        if normalization is not None:
            if len(normalization) != len(input_paths):
                raise ConfigError(f"Got {len(normalization)} intensity range(s) for {len(input_paths)} input slice(s)")
            for params in normalization:
                if params.maximum < params.minimum:
                    raise ConfigError(f"Intensity range {params.minimum}..{params.maximum} is reversed")
        slices = []
        for index, path in enumerate(input_paths):
            image = resize_slice(read_slice(path), self.config.image_size)
            params = normalization[index] if normalization is not None else NormalizationParams.from_array(image)
            slices.append(params.normalize(image))
        return torch.as_tensor(np.stack(slices)[None], dtype=torch.float32, device=self.device)

    @torch.no_grad()
    def synthesize(
        self,
        input_paths: Sequence[Union[str, Path]],
        normalization: Optional[Sequence[NormalizationParams]] = None,
    ) -> Dict[str, np.ndarray]:
        synthesized, pseudo = self.generator(self.prepare_inputs(input_paths, normalization))
        return {
            "synthesized": to_unit_range(synthesized[0, 0].cpu().numpy()),
            "pseudo_target": to_unit_range(pseudo[0, 0].cpu().numpy()),
        }

    def synthesize_to(
        self,
        input_paths: Sequence[Union[str, Path]],
        out_dir: Union[str, Path],
        emit_pseudo: bool = False,
        normalization: Optional[Sequence[NormalizationParams]] = None,
    ) -> Dict[str, Path]:
        out_dir = Path(out_dir)
        images = self.synthesize(input_paths, normalization)
        written = {"synthesized": write_unit_slice(out_dir / SYNTHESIZED_FILE, images["synthesized"])}
        if emit_pseudo:
            written["pseudo_target"] = write_unit_slice(out_dir / PSEUDO_TARGET_FILE, images["pseudo_target"])
        logger.info("Wrote %s", ", ".join(str(p) for p in written.values()))
        return written
