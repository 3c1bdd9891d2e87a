"""
Alternating adversarial optimization: one D update on a detached fake,
then one G update (adversarial + dual L1), per batch.
"""

import copy
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import torch
from torch import nn
from torch.optim import Adam

from src.data.dataset import SliceDataset, make_loader
from src.exceptions import DataPipelineError
from src.interfaces.run_observer import IRunObserver
from src.metrics.evaluation import evaluate_generator
from src.metrics.report import MetricReport
from src.networks.checkpoint import checkpoint_name, save_checkpoint
from src.networks.config import DiscriminatorConfig, GeneratorConfig
from src.networks.discriminator import Discriminator
from src.networks.generator import Generator, parameter_count
from src.training.config import TrainConfig
from src.training.losses import discriminator_loss, generator_adversarial_loss, reconstruction_loss
from src.training.manifest import EpochRecord, RunManifest
from src.training.schedule import LinearDecayScheduler
from src.training.seeding import seed_everything

logger = logging.getLogger(__name__)


@dataclass
class StepResult:
    loss_d: float
    loss_g: float
    loss_adv: float = math.nan
    loss_rec: float = math.nan
    l1_synth: float = math.nan
    l1_pseudo: float = math.nan
    skipped: bool = False
    reason: str = ""


def set_requires_grad(module: nn.Module, flag: bool) -> None:
    for parameter in module.parameters():
        parameter.requires_grad_(flag)


@contextmanager
def frozen_batch_norm_stats(module: nn.Module):
    """Restore every BatchNorm running buffer of ``module`` on exit (after any backward inside)."""
    saved = [
        (layer, {name: buffer.clone() for name, buffer in layer.named_buffers(recurse=False)})
        for layer in module.modules()
        if isinstance(layer, nn.modules.batchnorm._BatchNorm)
    ]
    try:
        yield
    finally:
        with torch.no_grad():
            for layer, buffers in saved:
                for name, value in buffers.items():
                    getattr(layer, name).copy_(value)


def build_models(
    generator_config: GeneratorConfig,
    seed: int,
    device: str = "cpu",
    dtype: torch.dtype = torch.float32,
) -> Tuple[Generator, Discriminator]:
    seed_everything(seed)
    generator = Generator(generator_config).to(device=device, dtype=dtype)
    discriminator = Discriminator(DiscriminatorConfig.for_generator(generator_config)).to(device=device, dtype=dtype)
    logger.info(
        "Built G (%d params) and D (%d params) for %d modalities at %dpx",
        parameter_count(generator),
        parameter_count(discriminator),
        generator_config.modality_count,
        generator_config.image_size,
    )
    return generator, discriminator


class Trainer:
    """Owns G, D and their Adam optimizers; ``train_step`` runs one alternation."""

    def __init__(self, generator: Generator, discriminator: Discriminator, config: TrainConfig):
        self.generator = generator
        self.discriminator = discriminator
        self.config = config
        self.weights = config.weights
        self.device = config.device
        self.optimizer_g = Adam(generator.parameters(), lr=config.base_lr, betas=config.betas)
        self.optimizer_d = Adam(discriminator.parameters(), lr=config.base_lr, betas=config.betas)
        self.scheduler = LinearDecayScheduler([self.optimizer_g, self.optimizer_d], config)
        self.step_count = 0

    def _to_device(self, tensor: torch.Tensor) -> torch.Tensor:
        dtype = next(self.generator.parameters()).dtype
        return tensor.to(device=self.device, dtype=dtype)

    def train_step(self, sources: torch.Tensor, target: torch.Tensor) -> StepResult:
        self.step_count += 1
        self.generator.train()
        self.discriminator.train()
        sources, target = self._to_device(sources), self._to_device(target)

        synthesized, pseudo = self.generator(sources)
        loss_rec = reconstruction_loss(target, synthesized, pseudo, self.weights)

        d_real = self.discriminator(sources, target)
        d_fake = self.discriminator(sources, synthesized.detach())
        loss_d = discriminator_loss(d_real, d_fake)
        if not torch.isfinite(loss_d):
            return StepResult(float(loss_d), math.nan, skipped=True, reason="non-finite discriminator loss")
        if not torch.isfinite(loss_rec):
            return StepResult(float(loss_d), float(loss_rec), skipped=True, reason="non-finite reconstruction loss")

        # pre-step D, restored if the G half of the alternation has to be dropped
        d_state = {name: value.detach().clone() for name, value in self.discriminator.state_dict().items()}
        d_optimizer_state = copy.deepcopy(self.optimizer_d.state_dict())
        self.optimizer_d.zero_grad(set_to_none=True)
        loss_d.backward()
        self.optimizer_d.step()

        set_requires_grad(self.discriminator, False)
        try:
            with frozen_batch_norm_stats(self.discriminator):
                loss_adv = generator_adversarial_loss(self.discriminator(sources, synthesized))
                loss_g = loss_adv + loss_rec
                finite = bool(torch.isfinite(loss_g))
                if finite:
                    self.optimizer_g.zero_grad(set_to_none=True)
                    loss_g.backward()
                    self.optimizer_g.step()
        finally:
            set_requires_grad(self.discriminator, True)

        if not finite:
            self.discriminator.load_state_dict(d_state)
            self.optimizer_d.load_state_dict(d_optimizer_state)
            return StepResult(float(loss_d), float(loss_g), skipped=True, reason="non-finite generator loss")

        with torch.no_grad():
            l1_synth = (target - synthesized).abs().mean().item()
            l1_pseudo = (target - pseudo).abs().mean().item()
        return StepResult(
            loss_d=loss_d.item(),
            loss_g=loss_g.item(),
            loss_adv=loss_adv.item(),
            loss_rec=loss_rec.item(),
            l1_synth=l1_synth,
            l1_pseudo=l1_pseudo,
        )

    def optimizer_states(self) -> Dict[str, Dict]:
        return {"generator": self.optimizer_g.state_dict(), "discriminator": self.optimizer_d.state_dict()}


@dataclass
class TrainResult:
    manifest: RunManifest
    generator: Generator
    test_report: Optional[MetricReport] = None

    @property
    def final_checkpoint(self) -> Optional[Path]:
        return Path(self.manifest.checkpoints[-1]) if self.manifest.checkpoints else None


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def train(
    config: TrainConfig,
    generator_config: GeneratorConfig,
    dataset: SliceDataset,
    output_dir: Union[str, Path],
    validation: Optional[SliceDataset] = None,
    test: Optional[SliceDataset] = None,
    observers: Iterable[IRunObserver] = (),
    run_name: str = "run",
    modalities: Optional[Dict] = None,
) -> TrainResult:
    """
    Full training run. Checkpoints go to ``output_dir/epoch_<n>.ckpt`` every
    ``checkpoint_every`` epochs and after the last epoch. ``validation`` is
    scored at the end of every epoch, ``test`` once after the last one.
    """
    if dataset is None or len(dataset) == 0:
        raise DataPipelineError("Training dataset is empty")
    output_dir = Path(output_dir)
    observers: List[IRunObserver] = list(observers)

    generator, discriminator = build_models(generator_config, config.seed, config.device)
    trainer = Trainer(generator, discriminator, config)
    loader = make_loader(dataset, config.batch_size, seed=config.seed)

    manifest = RunManifest(
        run_name=run_name,
        seed=config.seed,
        train_config=config.to_dict(),
        generator_config=generator_config.to_dict(),
        modalities=modalities or {},
        output_dir=str(output_dir),
    )
    for observer in observers:
        observer.on_run_start(manifest)

    try:
        for epoch in range(1, config.epochs + 1):
            started = time.perf_counter()
            lr = trainer.scheduler.current_lr
            results: List[StepResult] = []
            skipped = 0
            for batch in loader:
                result = trainer.train_step(batch["sources"], batch["target"])
                if result.skipped:
                    skipped += 1
                    event = manifest.add_event(
                        "skipped_step", epoch=epoch, step=trainer.step_count, reason=result.reason
                    )
                    logger.warning("Epoch %d step %d skipped: %s", epoch, trainer.step_count, result.reason)
                    for observer in observers:
                        observer.on_event(manifest, event)
                    continue
                results.append(result)

            record = EpochRecord(
                epoch=epoch,
                lr=lr,
                loss_d=_mean([r.loss_d for r in results]),
                loss_g=_mean([r.loss_g for r in results]),
                loss_l1_synth=_mean([r.l1_synth for r in results]),
                loss_l1_pseudo=_mean([r.l1_pseudo for r in results]),
                steps=len(results) + skipped,
                skipped_steps=skipped,
            )
            if validation is not None:
                summary = evaluate_generator(generator, validation, device=config.device, label=f"epoch {epoch}").summary()
                record.val_psnr = summary["psnr"]["mean"]
                record.val_ssim = summary["ssim"]["mean"]
                record.val_nrmse = summary["nrmse"]["mean"]

            periodic = config.checkpoint_every and epoch % config.checkpoint_every == 0
            if periodic or epoch == config.epochs:
                path = save_checkpoint(
                    output_dir / checkpoint_name(epoch),
                    generator,
                    seed=config.seed,
                    epoch=epoch,
                    discriminator=discriminator,
                    train_config=config.to_dict(),
                    optimizer_states=trainer.optimizer_states(),
                    modalities=modalities,
                )
                record.checkpoint = str(path)

            record.seconds = time.perf_counter() - started
            manifest.add_epoch(record)
            logger.info(
                "Epoch %d/%d lr=%.3g loss_D=%.4f loss_G=%.4f val_psnr=%s",
                epoch,
                config.epochs,
                lr,
                record.loss_d,
                record.loss_g,
                "n/a" if record.val_psnr is None else f"{record.val_psnr:.3f}",
            )
            for observer in observers:
                observer.on_epoch_end(manifest, record)
            trainer.scheduler.step()
    except BaseException:
        manifest.finish("failed")
        for observer in observers:
            observer.on_run_end(manifest)
        raise

    test_report = None
    if test is not None:
        test_report = evaluate_generator(generator, test, device=config.device, label=f"{run_name} test")
        manifest.test_metrics = test_report.summary()

    manifest.finish("completed")
    for observer in observers:
        observer.on_run_end(manifest)
    return TrainResult(manifest=manifest, generator=generator, test_report=test_report)
