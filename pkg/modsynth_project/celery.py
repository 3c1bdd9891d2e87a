"""
Celery configuration for the synthesis toolkit (ablation runs as tasks).
"""

import os
from celery import Celery

# Set default Django settings
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'modsynth_project.settings')

# Create Celery app
app = Celery('modsynth_project')

# Load config from Django settings with CELERY_ prefix
app.config_from_object('django.conf:settings', namespace='CELERY')

# Auto-discover tasks in all installed apps
app.autodiscover_tasks()
