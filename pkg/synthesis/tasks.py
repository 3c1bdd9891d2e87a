"""
Celery tasks for experiment runs.

Each matrix run trains in its own worker so a sweep can fan out across
workers; the ablate command gathers the results.
"""

from celery import shared_task
from celery.utils.log import get_task_logger

logger = get_task_logger(__name__)


@shared_task(bind=True)
def train_experiment_run(self, payload: dict):
    """
    Train and evaluate one experiment-matrix run.

    Args:
        payload: run payload from ExperimentMatrix.payloads()
    """
    from django.conf import settings

    from src.services.ablation_service import execute_run
    from synthesis.services import RunRegistryService

    logger.info(f"Starting run {payload['run']} of matrix {payload['matrix']}")
    self.update_state(state='PROGRESS', meta={
        'matrix': payload['matrix'],
        'run': payload['run'],
        'stage': 'training',
    })

    observers = [RunRegistryService(label=payload.get('label', ''))] if settings.MODSYNTH_REGISTRY_ENABLED else []
    result = execute_run(payload, observers=observers)
    logger.info(f"Finished run {payload['run']}: {result.get('summary')}")
    return result
