import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from src.config import CliConfig
from src.data.dataset import SliceDataset
from src.data.manifest import DatasetManifest
from src.data.pipeline import SlicePipeline, split_subjects
from src.exceptions import DataPipelineError
from src.exporters.csv_exporter import CsvExporter
from src.interfaces.run_observer import IRunObserver
from src.training.manifest import ManifestWriter
from src.training.trainer import TrainResult, train

logger = logging.getLogger(__name__)

TEST_METRICS_FILE = "test_metrics.csv"


@dataclass
class PreparedData:
    train_ids: List[str]
    test_ids: List[str]
    train: SliceDataset
    test: Optional[SliceDataset]


class TrainingService:
    """
    Runs one configured training job end to end: manifest -> slices ->
    subject split -> train -> test-cohort metrics.

    Observers (e.g. the database run registry) are notified alongside the
    manifest writer that every run gets.
    """

    def __init__(
        self,
        output_root: Union[str, Path],
        observers: Sequence[IRunObserver] = (),
        csv_exporter: Optional[CsvExporter] = None,
    ):
        self._output_root = Path(output_root)
        self._observers = list(observers)
        self._csv_exporter = csv_exporter or CsvExporter()

    def output_dir_for(self, config: CliConfig) -> Path:
        return config.resolve_output_dir(self._output_root)

    def prepare_data(self, config: CliConfig) -> PreparedData:
        manifest = DatasetManifest.read(config.data_manifest)
        pipeline = SlicePipeline(
            config.source_modalities,
            config.target_modality,
            keep_count=config.keep_count,
            image_size=config.image_size,
        )
        manifest.require_modalities(pipeline.modalities)
        if config.train_subjects > len(manifest):
            raise DataPipelineError(
                f"train_subjects={config.train_subjects} but the manifest lists only {len(manifest)} subjects"
            )
        train_ids, test_ids = split_subjects(manifest.subject_ids, config.train_subjects, config.seed)
        train_set = SliceDataset(pipeline.build(manifest, train_ids))
        test_set = SliceDataset(pipeline.build(manifest, test_ids)) if test_ids else None
        logger.info(
            "%s: %d train subjects (%d slices), %d test subjects",
            config.label,
            len(train_ids),
            len(train_set),
            len(test_ids),
        )
        return PreparedData(train_ids, test_ids, train_set, test_set)

    def run(
        self,
        config: CliConfig,
        run_name: Optional[str] = None,
        output_dir: Optional[Path] = None,
        data: Optional[PreparedData] = None,
    ) -> Tuple[TrainResult, Path]:
        output_dir = Path(output_dir) if output_dir else self.output_dir_for(config)
        run_name = run_name or output_dir.name
        data = data or self.prepare_data(config)

        result = train(
            config.to_train_config(),
            config.to_generator_config(),
            data.train,
            output_dir,
            validation=data.test,
            test=data.test,
            observers=[ManifestWriter(output_dir), *self._observers],
            run_name=run_name,
            modalities={
                "sources": [m.value for m in config.source_modalities],
                "target": config.target_modality.value,
                "train_subjects": data.train_ids,
                "test_subjects": data.test_ids,
            },
        )
        if result.test_report is not None:
            self._csv_exporter.export(result.test_report, output_dir / TEST_METRICS_FILE)
        return result, output_dir
