from typing import Dict, List, Sequence

import torch
from torch.utils.data import DataLoader, Dataset

from src.data.models import SliceSample
from src.exceptions import DataPipelineError


class SliceDataset(Dataset):
    """Torch view over SliceSamples: ``sources`` (M,S,S) and ``target`` (1,S,S)."""

    def __init__(self, samples: Sequence[SliceSample], dtype: torch.dtype = torch.float32):
        if not samples:
            raise DataPipelineError("SliceDataset needs at least one sample")
        modalities = {s.source_modalities for s in samples}
        if len(modalities) != 1:
            raise DataPipelineError(f"Mixed source modality sets in one dataset: {modalities}")
        self._samples: List[SliceSample] = list(samples)
        self._dtype = dtype

    def __len__(self) -> int:
        return len(self._samples)

    def __getitem__(self, index: int) -> Dict[str, torch.Tensor]:
        sample = self._samples[index]
        return {
            "sources": torch.as_tensor(sample.sources, dtype=self._dtype),
            "target": torch.as_tensor(sample.target, dtype=self._dtype).unsqueeze(0),
            "index": torch.tensor(index),
        }

    def sample(self, index: int) -> SliceSample:
        return self._samples[index]


def make_loader(
    dataset: SliceDataset,
    batch_size: int,
    seed: int,
    shuffle: bool = True,
) -> DataLoader:
    """Single-process loader whose shuffle order depends only on the seed."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=shuffle,
        generator=generator,
        num_workers=0,
        drop_last=False,
    )
