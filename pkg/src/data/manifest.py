"""
Dataset manifest: one subject per line, subject id plus one path per modality.

Stored as CSV (``subject_id,T1,T1c,T2,FLAIR``) with paths relative to the
manifest's own directory.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Union

import pandas as pd

from src.data.models import Modality
from src.exceptions import DataPipelineError

MANIFEST_FILENAME = "manifest.csv"


@dataclass
class SubjectRecord:
    subject_id: str
    paths: Dict[Modality, Path] = field(default_factory=dict)

    def path_for(self, modality: Modality) -> Path:
        try:
            return self.paths[modality]
        except KeyError:
            raise DataPipelineError(
                f"Subject {self.subject_id} has no {modality.value} volume in the manifest"
            ) from None


@dataclass
class DatasetManifest:
    root: Path
    subjects: List[SubjectRecord] = field(default_factory=list)

    @property
    def subject_ids(self) -> List[str]:
        return [s.subject_id for s in self.subjects]

    def __len__(self) -> int:
        return len(self.subjects)

    def get(self, subject_id: str) -> SubjectRecord:
        for subject in self.subjects:
            if subject.subject_id == subject_id:
                return subject
        raise DataPipelineError(f"Subject {subject_id!r} not in manifest {self.root}")

    def require_modalities(self, modalities: Iterable[Modality]) -> None:
        """Fail early if any subject lacks one of the requested modalities."""
        missing = [
            f"{s.subject_id}:{m.value}"
            for s in self.subjects
            for m in modalities
            if m not in s.paths
        ]
        if missing:
            raise DataPipelineError(f"Manifest is missing volumes: {', '.join(missing[:10])}")

    @classmethod
    def read(cls, path: Union[str, Path]) -> "DatasetManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_FILENAME
        if not path.exists():
            raise DataPipelineError(f"Dataset manifest not found: {path}")

        df = pd.read_csv(path, dtype=str).fillna("")
        if "subject_id" not in df.columns:
            raise DataPipelineError(f"{path}: manifest needs a subject_id column")

        modality_columns = [c for c in df.columns if c != "subject_id"]
        modalities = {c: Modality.parse(c) for c in modality_columns}
        root = path.parent
        subjects = []
        for row in df.to_dict(orient="records"):
            paths = {
                modalities[col]: root / row[col]
                for col in modality_columns
                if row[col]
            }
            subjects.append(SubjectRecord(subject_id=row["subject_id"], paths=paths))

        ids = [s.subject_id for s in subjects]
        if len(set(ids)) != len(ids):
            raise DataPipelineError(f"{path}: duplicate subject ids")
        return cls(root=root, subjects=sorted(subjects, key=lambda s: s.subject_id))

    def write(self, path: Union[str, Path, None] = None) -> Path:
        path = Path(path) if path else self.root / MANIFEST_FILENAME
        path.parent.mkdir(parents=True, exist_ok=True)
        records = []
        for subject in self.subjects:
            row = {"subject_id": subject.subject_id}
            for modality in Modality:
                target = subject.paths.get(modality)
                row[modality.value] = (
                    Path(target).relative_to(path.parent).as_posix() if target else ""
                )
            records.append(row)
        columns = ["subject_id"] + [m.value for m in Modality]
        pd.DataFrame(records, columns=columns).to_csv(path, index=False)
        return path
