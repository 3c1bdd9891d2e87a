"""Shared helpers for the synthesis management commands."""

import argparse
import logging
from contextlib import contextmanager

from django.core.management.base import CommandError

from src.exceptions import ModSynthError

logger = logging.getLogger(__name__)


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {number}")
    return number


@contextmanager
def command_errors():
    """Turn toolkit and filesystem errors into CommandError (non-zero exit)."""
    try:
        yield
    except ModSynthError as e:
        raise CommandError(str(e)) from e
    except OSError as e:
        raise CommandError(f"{type(e).__name__}: {e}") from e
