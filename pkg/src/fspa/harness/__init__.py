"""Declarative experiment scenarios and their tabular output."""

from .analysis import LinearFit, fit_linear, fspa_top_k
from .config import SCENARIOS, ScenarioConfig, load_config
from .generators import SpectrumSpec, gen_spectrum, perturb_operator
from .results import ScenarioResult
from .scenarios import RUNNERS, run_scenario
