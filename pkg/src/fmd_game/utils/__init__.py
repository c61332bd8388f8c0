from .config import ExperimentConfig, load_config, parse_config
from .dataset_loader import DATASETS, fetch_dataset, load_event_log
from .serialization import profile_to_csv, profile_from_csv

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "DATASETS",
    "fetch_dataset",
    "load_event_log",
    "profile_to_csv",
    "profile_from_csv",
]
