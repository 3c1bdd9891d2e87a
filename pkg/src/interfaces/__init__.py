from .volume_io import IVolumeReader, IVolumeWriter
from .exporter import IExporter
from .run_observer import IRunObserver
from .run_executor import IRunExecutor

__all__ = ["IVolumeReader", "IVolumeWriter", "IExporter", "IRunObserver", "IRunExecutor"]
