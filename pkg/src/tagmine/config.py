import logging
import os
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/tagmine.yml"


@dataclass
class RunDefaults:
    """Default values for the numeric knobs of every subcommand."""
    top_k: int = 5000
    min_freq: int = 1
    threshold: float = 0.5
    alpha: float = 0.8
    gamma_pos: float = 0.0
    gamma_neg: float = 4.0
    lr: float = 0.5
    epochs: int = 20
    batch_size: int = 32
    temperature: float = 0.07
    seed: int = 0
    gradcheck_instances: int = 100
    sweep: str = "0.1:0.9:0.1"
    topk: int = 10


class ConfigManager:
    """Manages run defaults loaded from a YAML file."""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or os.environ.get("TAGMINE_CONFIG", DEFAULT_CONFIG_PATH)
        self.defaults = RunDefaults()
        self.load_config()

    def load_config(self):
        """Load default knob values from the YAML file, keeping built-ins for anything missing."""
        if not os.path.exists(self.config_path):
            logger.debug(f"Config file not found: {self.config_path}; using built-in defaults")
            return

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                config_data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"Error loading config {self.config_path}: {e}")
            return

        known = {f.name for f in fields(RunDefaults)}
        for key, value in (config_data.get('defaults') or {}).items():
            if key not in known:
                logger.warning(f"Ignoring unknown config key '{key}' in {self.config_path}")
                continue
            caster = type(getattr(self.defaults, key))
            try:
                setattr(self.defaults, key, caster(value))
            except (TypeError, ValueError):
                logger.warning(f"Ignoring config key '{key}': cannot read {value!r} as {caster.__name__}")

    def get(self, key: str) -> Any:
        """Get a default value by knob name."""
        return getattr(self.defaults, key)

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self.defaults, f.name) for f in fields(RunDefaults)}


def worker_count() -> int:
    """Worker pool size: CPU count, capped by TAGMINE_THREADS when set."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get("TAGMINE_THREADS")
    if not raw:
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        logger.warning(f"TAGMINE_THREADS={raw!r} is not an integer; ignoring it")
        return cpus
    return max(1, min(cpus, cap))
