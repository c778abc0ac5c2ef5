from nsdde.experiment.presets.loader import list_presets, load, preset_config

__all__ = ["list_presets", "load", "preset_config"]
