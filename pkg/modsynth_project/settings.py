"""
Django settings for modsynth_project project.

Everything run-specific lives in the YAML run configs (see configs/); this
module only holds process-level settings, read from the environment.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-modsynth-local-only')

DEBUG = os.environ.get('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    # Third party
    'django_celery_results',
    # Local apps
    'synthesis',
]


# Database
#
# Set DB_ENGINE=postgresql to use PostgreSQL, otherwise defaults to SQLite.
# PostgreSQL env vars: DB_NAME, DB_USER, DB_PASSWORD, DB_HOST, DB_PORT

if os.environ.get('DB_ENGINE') == 'postgresql':
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': os.environ.get('DB_NAME', 'modsynth'),
            'USER': os.environ.get('DB_USER', 'modsynth'),
            'PASSWORD': os.environ.get('DB_PASSWORD', 'modsynth'),
            'HOST': os.environ.get('DB_HOST', 'localhost'),
            'PORT': os.environ.get('DB_PORT', '5432'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
            'OPTIONS': {
                'timeout': 30,  # Wait up to 30 seconds for locks
            },
        }
    }


TIME_ZONE = 'UTC'

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Toolkit settings
#
# MODSYNTH_SEED: seed used when a command or config gives none
# MODSYNTH_OUTPUT_ROOT: root for relative run/experiment output directories
# MODSYNTH_DEVICE: torch device for inference commands

MODSYNTH_SEED = int(os.environ.get('MODSYNTH_SEED', '0'))
MODSYNTH_OUTPUT_ROOT = Path(os.environ.get('MODSYNTH_OUTPUT_ROOT', BASE_DIR / 'runs'))
MODSYNTH_DEVICE = os.environ.get('MODSYNTH_DEVICE', 'cpu')
MODSYNTH_LOG_LEVEL = os.environ.get('MODSYNTH_LOG_LEVEL', 'INFO')
MODSYNTH_REGISTRY_ENABLED = os.environ.get('MODSYNTH_REGISTRY', '1') == '1'


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'standard',
        },
    },
    'loggers': {
        'src': {
            'handlers': ['console'],
            'level': MODSYNTH_LOG_LEVEL,
            'propagate': False,
        },
        'synthesis': {
            'handlers': ['console'],
            'level': MODSYNTH_LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Celery Configuration
# Using filesystem broker for development (no Redis needed)
# For production, use Redis: CELERY_BROKER_URL = 'redis://localhost:6379/0'
_celery_data_dir = BASE_DIR / 'celery_data'
os.makedirs(_celery_data_dir / 'out', exist_ok=True)
os.makedirs(_celery_data_dir / 'processed', exist_ok=True)

CELERY_BROKER_URL = 'filesystem://'
CELERY_BROKER_TRANSPORT_OPTIONS = {
    'data_folder_in': str(_celery_data_dir / 'out'),
    'data_folder_out': str(_celery_data_dir / 'out'),
    'data_folder_processed': str(_celery_data_dir / 'processed'),
}
CELERY_RESULT_BACKEND = 'django-db'
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 24 * 60 * 60  # full-scale runs take many hours
CELERY_TASK_ALWAYS_EAGER = os.environ.get('CELERY_TASK_ALWAYS_EAGER', '0') == '1'
CELERY_TASK_EAGER_PROPAGATES = True
