"""Management command: write a procedural multi-modal phantom dataset."""
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from src.phantom.generator import PhantomSpec, write_dataset
from synthesis.management.commands._common import command_errors, positive_int


class Command(BaseCommand):
    help = (
        'Generate a phantom dataset (all four modalities from one shared label field) '
        'plus manifest.csv. Defaults: 12 subjects of 32x96x96 voxels.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--out', required=True, help='Dataset root directory')
        parser.add_argument('--subjects', type=positive_int, default=12, help='Number of subjects (default 12)')
        parser.add_argument('--seed', type=int, default=None, help='RNG seed (default MODSYNTH_SEED)')
        parser.add_argument('--depth', type=positive_int, default=32, help='Axial slices per volume (default 32)')
        parser.add_argument('--size', type=positive_int, default=96, help='In-plane size (default 96)')
        parser.add_argument('--shapes', type=positive_int, default=6, help='Inner ellipsoids per subject (default 6)')
        parser.add_argument('--texture', type=float, default=20.0, help='Texture amplitude in intensity units (default 20)')
        parser.add_argument('--format', choices=['nifti', 'png'], default='nifti', help='Volume format (default nifti)')

    def handle(self, *args, **options):
        seed = options['seed'] if options['seed'] is not None else settings.MODSYNTH_SEED
        spec = PhantomSpec(
            seed=seed,
            subject_count=options['subjects'],
            depth=options['depth'],
            height=options['size'],
            width=options['size'],
            shape_count=options['shapes'],
            texture_amplitude=options['texture'],
        )
        out = Path(options['out'])
        self.stdout.write(f"Writing {spec.subject_count} phantom subjects to {out} (seed {seed})...")

        with command_errors():
            manifest = write_dataset(spec, out, fmt=options['format'])

        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(manifest)} subjects; manifest at {out / 'manifest.csv'}"
        ))
