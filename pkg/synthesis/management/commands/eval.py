"""Management command: PSNR/SSIM/NRMSE of predicted slices against ground truth."""
from django.core.management.base import BaseCommand

from src.services.evaluation_service import EvaluationService
from synthesis.management.commands._common import command_errors


class Command(BaseCommand):
    help = (
        'Pair slice files by relative path and score them. Writes one CSV row per slice '
        '(subject_id, slice_index, psnr, ssim, nrmse) and a "mean ± std" footer row.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--pred-dir', required=True, help='Directory of synthesized slices')
        parser.add_argument('--gt-dir', required=True, help='Directory of ground-truth slices')
        parser.add_argument('--csv', required=True, help='Output CSV path')
        parser.add_argument('--markdown', default=None, help='Optional markdown summary path')
        parser.add_argument('--windowed-ssim', action='store_true',
                            help='Sliding-window SSIM instead of the global-statistics form')

    def handle(self, *args, **options):
        service = EvaluationService()
        with command_errors():
            report = service.evaluate_directories(
                options['pred_dir'], options['gt_dir'], windowed_ssim=options['windowed_ssim']
            )
            written = service.write_report(report, options['csv'], options['markdown'])

        for metric in ('psnr', 'ssim', 'nrmse'):
            self.stdout.write(f"  {metric.upper()}: {report.aggregate(metric).format()}")
        self.stdout.write(self.style.SUCCESS(
            f"Evaluated {report.sample_count} slices -> {', '.join(str(p) for p in written.values())}"
        ))
