# Generated by Django 5.2.10 on 2026-10-17 09:12

import django.db.models.deletion
import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('run_name', models.CharField(db_index=True, max_length=200)),
                ('output_dir', models.CharField(max_length=500)),
                ('label', models.CharField(blank=True, max_length=100)),
                ('seed', models.IntegerField()),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('train_config', models.JSONField(default=dict)),
                ('generator_config', models.JSONField(default=dict)),
                ('modalities', models.JSONField(default=dict)),
                ('events', models.JSONField(default=list)),
                ('started_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('epochs_completed', models.IntegerField(default=0)),
                ('final_checkpoint', models.CharField(blank=True, max_length=500)),
                ('test_psnr_mean', models.FloatField(blank=True, null=True)),
                ('test_ssim_mean', models.FloatField(blank=True, null=True)),
                ('test_nrmse_mean', models.FloatField(blank=True, null=True)),
                ('test_metrics', models.JSONField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='EpochSummary',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('epoch', models.IntegerField()),
                ('lr', models.FloatField()),
                ('loss_d', models.FloatField(blank=True, null=True)),
                ('loss_g', models.FloatField(blank=True, null=True)),
                ('loss_l1_synth', models.FloatField(blank=True, null=True)),
                ('loss_l1_pseudo', models.FloatField(blank=True, null=True)),
                ('steps', models.IntegerField(default=0)),
                ('skipped_steps', models.IntegerField(default=0)),
                ('seconds', models.FloatField(default=0)),
                ('val_psnr', models.FloatField(blank=True, null=True)),
                ('val_ssim', models.FloatField(blank=True, null=True)),
                ('val_nrmse', models.FloatField(blank=True, null=True)),
                ('checkpoint', models.CharField(blank=True, max_length=500)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='epochs', to='synthesis.trainingrun')),
            ],
            options={
                'ordering': ['run', 'epoch'],
                'unique_together': {('run', 'epoch')},
            },
        ),
    ]
