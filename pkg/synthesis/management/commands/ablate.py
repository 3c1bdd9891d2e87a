"""Management command: run an experiment matrix (block-size / modality sweeps)."""
from django.conf import settings
from django.core.management.base import BaseCommand

from src.services.ablation_service import AblationService, CeleryRunExecutor, ExperimentMatrix, InlineRunExecutor
from synthesis.management.commands._common import command_errors


class Command(BaseCommand):
    help = (
        'Train and score every run of a matrix config; writes table.csv, table.md, '
        'metrics.png, significance.md and a comparison panel per run under experiments/<matrix>/.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--matrix-config', required=True, help='Matrix YAML (see configs/*_sweep.yaml)')
        parser.add_argument('--executor', choices=['inline', 'celery'], default='inline',
                            help='inline: sequential in this process; celery: one task per run')
        parser.add_argument('--dry-run', action='store_true', help='Validate the matrix and list its runs')
        parser.add_argument('--no-registry', action='store_true', help='Do not record runs in the database')

    def handle(self, *args, **options):
        with command_errors():
            matrix = ExperimentMatrix.from_file(
                options['matrix_config'], settings.MODSYNTH_OUTPUT_ROOT, seed_fallback=settings.MODSYNTH_SEED
            )

        self.stdout.write(f"Matrix {matrix.name}: {len(matrix.runs)} runs varying {', '.join(matrix.swept_keys)}")
        for run in matrix.runs:
            self.stdout.write(f"  {run.name}: {run.overrides}")
        if options['dry_run']:
            self.stdout.write(self.style.SUCCESS('Matrix is valid'))
            return

        use_registry = settings.MODSYNTH_REGISTRY_ENABLED and not options['no_registry']
        if options['executor'] == 'celery':
            from synthesis.tasks import train_experiment_run
            executor = CeleryRunExecutor(train_experiment_run)
        else:
            observers = []
            if use_registry:
                from synthesis.services import RunRegistryService
                observers.append(RunRegistryService())
            executor = InlineRunExecutor(observers)

        with command_errors():
            result = AblationService(executor).run_matrix(matrix)

        for note in result.notes:
            self.stdout.write(f"  note: {note}")
        for kind, path in result.files.items():
            self.stdout.write(f"  {kind}: {path}")
        self.stdout.write(self.style.SUCCESS(f"Matrix {matrix.name} complete"))
