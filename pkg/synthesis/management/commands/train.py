"""Management command: train a synthesis model from a YAML run config."""
import argparse
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from src.config import CliConfig
from src.services.training_service import TrainingService
from synthesis.management.commands._common import command_errors, positive_int


def _defaults_epilog() -> str:
    lines = ['config keys and defaults:']
    lines += [f'  {line}' for line in CliConfig().describe()]
    return '\n'.join(lines)


class Command(BaseCommand):
    help = 'Train G/D on the configured dataset; writes checkpoints, manifest.jsonl and summary.json.'

    def add_arguments(self, parser):
        parser.formatter_class = argparse.RawDescriptionHelpFormatter
        parser.epilog = _defaults_epilog()
        parser.add_argument('--config', required=True, help='YAML run config (see configs/)')
        parser.add_argument('--seed', type=int, default=None, help='Override the config seed')
        parser.add_argument('--epochs', type=positive_int, default=None, help='Override epochs')
        parser.add_argument('--output-dir', default=None, help='Override the run output directory')
        parser.add_argument('--show-config', action='store_true', help='Print the resolved config and exit')
        parser.add_argument('--no-registry', action='store_true', help='Do not record the run in the database')

    def handle(self, *args, **options):
        with command_errors():
            config = CliConfig.from_file(options['config'], seed_fallback=settings.MODSYNTH_SEED)
            overrides = {}
            if options['seed'] is not None:
                overrides['seed'] = options['seed']
            if options['epochs'] is not None:
                overrides['epochs'] = options['epochs']
                overrides['decay_start_epoch'] = min(config.decay_start_epoch, options['epochs'])
            if options['output_dir']:
                overrides['output_dir'] = options['output_dir']
            if overrides:
                config = config.with_overrides(**overrides)

        if options['show_config']:
            for line in config.describe():
                self.stdout.write(line)
            return

        observers = []
        if settings.MODSYNTH_REGISTRY_ENABLED and not options['no_registry']:
            from synthesis.services import RunRegistryService
            observers.append(RunRegistryService(label=config.label))

        service = TrainingService(settings.MODSYNTH_OUTPUT_ROOT, observers=observers)
        self.stdout.write(f"Training {config.label} for {config.epochs} epochs (seed {config.seed})...")
        with command_errors():
            result, output_dir = service.run(config)

        last = result.manifest.last_epoch
        self.stdout.write(f"  final loss_D={last.loss_d:.4f} loss_G={last.loss_g:.4f}")
        if result.test_report is not None:
            for metric in ('psnr', 'ssim', 'nrmse'):
                self.stdout.write(f"  test {metric.upper()}: {result.test_report.aggregate(metric).format()}")
        self.stdout.write(self.style.SUCCESS(
            f"Run complete: {Path(output_dir)} (checkpoint {result.final_checkpoint})"
        ))
