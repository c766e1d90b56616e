from .config import ExperimentConfig
from .experiments import EXPERIMENTS, default_config, run_experiment
from .parallel import replicate, stream
from .results import ExperimentResult, load_result

__all__ = ["ExperimentConfig", "EXPERIMENTS", "default_config", "run_experiment",
           "replicate", "stream", "ExperimentResult", "load_result"]
