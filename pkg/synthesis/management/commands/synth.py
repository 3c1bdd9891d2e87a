"""Management command: synthesize the target slice from M source slices."""
from django.conf import settings
from django.core.management.base import BaseCommand

from src.data.models import NormalizationParams
from src.services.synthesis_service import SynthesisService
from synthesis.management.commands._common import command_errors


class Command(BaseCommand):
    help = 'Run a trained generator on one set of source slices (PNG or 2D NIfTI); writes 16-bit PNGs.'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True, help='epoch_<n>.ckpt written by train')
        parser.add_argument('--inputs', nargs='+', required=True,
                            help='Source slices, in the modality order the model was trained with')
        parser.add_argument('--out', required=True, help='Output directory')
        parser.add_argument('--input-range', nargs=2, type=float, action='append', metavar=('MIN', 'MAX'),
                            help='Intensity range of each source volume, once per input in --inputs order. '
                                 'Training scales by whole-volume min/max; without this flag each slice '
                                 'is scaled by its own min/max.')
        parser.add_argument('--emit-pseudo', action='store_true', help='Also write the LAF pseudo-target')
        parser.add_argument('--device', default=None, help='Torch device (default MODSYNTH_DEVICE)')

    def handle(self, *args, **options):
        with command_errors():
            service = SynthesisService(options['checkpoint'], device=options['device'] or settings.MODSYNTH_DEVICE)
            ranges = options['input_range']
            normalization = [NormalizationParams(low, high) for low, high in ranges] if ranges else None
            written = service.synthesize_to(
                options['inputs'], options['out'], emit_pseudo=options['emit_pseudo'], normalization=normalization
            )

        for name, path in written.items():
            self.stdout.write(f"  {name}: {path}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} image(s)"))
