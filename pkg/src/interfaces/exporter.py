from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

# A metric report, a list of table rows, or a ready frame
ExportData = Union[Any, List[Dict[str, Any]], pd.DataFrame]


class IExporter(ABC):
    """Writes a metric report or summary table to one file and returns its path."""

    @abstractmethod
    def export(self, data: ExportData, output_path: Path, **options) -> Path:
        """Create parent directories as needed; raise ValueError on empty data."""
