# byzfed/io/__init__.py
from .config import ConfigFile, dump_config, load_config, parse_config, read_config, write_config
from .presets import PRESET_ALIASES, PRESETS, Preset, PresetSeries, get_preset, preset_names
from .results import COLUMNS, read_results, render_csv, write_results

__all__ = [
    "COLUMNS",
    "ConfigFile",
    "PRESETS",
    "PRESET_ALIASES",
    "Preset",
    "PresetSeries",
    "dump_config",
    "get_preset",
    "load_config",
    "parse_config",
    "preset_names",
    "read_config",
    "read_results",
    "render_csv",
    "write_config",
    "write_results",
]
