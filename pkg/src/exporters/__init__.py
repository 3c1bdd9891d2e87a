from .csv_exporter import CsvExporter, read_report_csv
from .markdown_exporter import MarkdownExporter
from .plot_exporter import PlotExporter

__all__ = ["CsvExporter", "MarkdownExporter", "PlotExporter", "read_report_csv"]
