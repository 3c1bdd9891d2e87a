"""
Run registry: one TrainingRun per training invocation, one EpochSummary per
finished epoch. Mirrors the run manifest so past runs can be queried.
"""

from django.db import models
from django.utils import timezone


class TrainingRun(models.Model):
    """A single training run (standalone or part of an experiment matrix)."""

    STATUS_CHOICES = [
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    run_name = models.CharField(max_length=200, db_index=True)
    output_dir = models.CharField(max_length=500)
    label = models.CharField(max_length=100, blank=True)
    seed = models.IntegerField()
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')

    train_config = models.JSONField(default=dict)
    generator_config = models.JSONField(default=dict)
    modalities = models.JSONField(default=dict)
    events = models.JSONField(default=list)

    started_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)
    epochs_completed = models.IntegerField(default=0)
    final_checkpoint = models.CharField(max_length=500, blank=True)

    # Test-cohort aggregates (null until the run finishes)
    test_psnr_mean = models.FloatField(null=True, blank=True)
    test_ssim_mean = models.FloatField(null=True, blank=True)
    test_nrmse_mean = models.FloatField(null=True, blank=True)
    test_metrics = models.JSONField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f"{self.run_name} ({self.label or 'run'}, {self.status})"


class EpochSummary(models.Model):
    """Per-epoch loss means and validation metrics."""

    run = models.ForeignKey(TrainingRun, on_delete=models.CASCADE, related_name='epochs')
    epoch = models.IntegerField()
    lr = models.FloatField()
    loss_d = models.FloatField(null=True, blank=True)
    loss_g = models.FloatField(null=True, blank=True)
    loss_l1_synth = models.FloatField(null=True, blank=True)
    loss_l1_pseudo = models.FloatField(null=True, blank=True)
    steps = models.IntegerField(default=0)
    skipped_steps = models.IntegerField(default=0)
    seconds = models.FloatField(default=0)
    val_psnr = models.FloatField(null=True, blank=True)
    val_ssim = models.FloatField(null=True, blank=True)
    val_nrmse = models.FloatField(null=True, blank=True)
    checkpoint = models.CharField(max_length=500, blank=True)

    class Meta:
        ordering = ['run', 'epoch']
        unique_together = [['run', 'epoch']]

    def __str__(self):
        return f"{self.run.run_name} epoch {self.epoch}"
