from .models import Modality, ModalityVolume, NormalizationParams, SliceSample, synthesis_label
from .volume_io import load_volume, save_volume, read_slice, read_unit_slice, write_unit_slice
from .manifest import DatasetManifest, SubjectRecord
from .pipeline import SlicePipeline, extract_slices, split_subjects, denormalize
from .dataset import SliceDataset, make_loader

__all__ = [
    "Modality",
    "ModalityVolume",
    "NormalizationParams",
    "SliceSample",
    "synthesis_label",
    "load_volume",
    "save_volume",
    "read_slice",
    "read_unit_slice",
    "write_unit_slice",
    "DatasetManifest",
    "SubjectRecord",
    "SlicePipeline",
    "extract_slices",
    "split_subjects",
    "denormalize",
    "SliceDataset",
    "make_loader",
]
