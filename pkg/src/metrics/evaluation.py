import logging

import torch
from torch.utils.data import DataLoader

from src.data.dataset import SliceDataset
from src.metrics.image_quality import slice_metrics, to_unit_range
from src.metrics.report import MetricReport

logger = logging.getLogger(__name__)


@torch.no_grad()
def evaluate_generator(
    generator,
    dataset: SliceDataset,
    batch_size: int = 8,
    device: str = "cpu",
    label: str = "",
    windowed_ssim: bool = False,
) -> MetricReport:
    """Synthesize every slice of ``dataset`` and score it against the real target."""
    was_training = generator.training
    generator.eval()
    report = MetricReport(label=label)
    loader = DataLoader(dataset, batch_size=batch_size, shuffle=False, num_workers=0)
    try:
        for batch in loader:
            parameter = next(generator.parameters())
            sources = batch["sources"].to(device=device, dtype=parameter.dtype)
            synthesized, _ = generator(sources)
            synthesized = synthesized.cpu().numpy()
            targets = batch["target"].numpy()
            for row, index in enumerate(batch["index"].tolist()):
                sample = dataset.sample(index)
                real = to_unit_range(targets[row, 0])
                synth = to_unit_range(synthesized[row, 0])
                report.add(sample.subject_id, sample.slice_index, *slice_metrics(real, synth, windowed_ssim))
    finally:
        generator.train(was_training)
    logger.debug("Evaluated %d slices", report.sample_count)
    return report
