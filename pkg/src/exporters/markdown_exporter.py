from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.interfaces.exporter import IExporter


class MarkdownExporter(IExporter):
    """Markdown tables (pipe format via tabulate)."""

    def render(self, data: Union[List[Dict[str, Any]], pd.DataFrame], title: Optional[str] = None,
               notes: Optional[List[str]] = None) -> str:
        df = data if isinstance(data, pd.DataFrame) else pd.DataFrame(data)
        parts = []
        if title:
            parts.append(f"## {title}\n")
        parts.append(df.to_markdown(index=False))
        for note in notes or []:
            parts.append(f"\n> {note}")
        return "\n".join(parts) + "\n"

    def export(self, data, output_path: Path, title: Optional[str] = None,
               notes: Optional[List[str]] = None) -> Path:
        if data is None or len(data) == 0:
            raise ValueError("No data to export")
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.render(data, title, notes), encoding="utf-8")
        return output_path
