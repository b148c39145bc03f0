"""
YAML configuration handling for scenario and bay-problem files.

A config file may pull in other YAML files through a `defaults` list (the including file
wins on conflicts), read environment variables through `$`-prefixed keys, and be adjusted
from the command line with dot-notation overrides such as `weights.margin=2`.
"""
import os
from typing import Iterable, Optional, Union

import yaml

from .errors import ConfigError

DEFAULTS_KEYWORD: str = "defaults"
ENV_PREFIX: str = "$"


class Config():
    def __init__(self, config_dict: dict, source: Optional[str] = None):
        """
        Initializes the config from a dictionary. Nested dictionaries become nested Configs.
        """
        if not isinstance(config_dict, dict):
            raise ConfigError("Supplied config must be a mapping")
        self.__source = source
        self._init_from_dict(config_dict)

    def update(self, update_config: Union[dict, "Config"]) -> "Config":
        """
        Place the values of another config into this one, overwriting existing keys and
        creating missing ones.

        Args:
            update_config (dict|Config): The keys/values to place into the config. If this is a
            dictionary, keys may use dot notation ("weights.sales").
        """
        if not isinstance(update_config, Config):
            update_config = config_to_nested_config(update_config)
        self._update_from_config(update_config)
        return self

    def _update_from_config(self, update_config: "Config"):
        for k, v in Config.items(update_config):
            if isinstance(v, Config):
                if k not in self or not isinstance(self[k], Config):
                    self[k] = Config({}, self.__source)
                self[k]._update_from_config(v)
            else:
                self[k] = v

    def _init_from_dict(self, dictionary: dict):
        for key, value in dictionary.items():
            if isinstance(value, dict):
                value = Config(value, self.__source)
            self[str(key)] = value

    def items(self):
        return [(k, v) for k, v in self.__dict__.items() if not k.startswith("_Config__")]

    def get(self, key: str, default=None):
        return self[key] if key in self else default

    def __contains__(self, key: str) -> bool:
        return key in self.__dict__ and not key.startswith("_Config__")

    def __getitem__(self, key: str):
        return self.__getattribute__(key)

    def __setitem__(self, key: str, value):
        self.__setattr__(key, value)

    def __delitem__(self, key: str):
        self.__delattr__(key)

    def __str__(self):
        return self._subconfig_str(self, 0)[1:]

    def __repr__(self):
        return f"Config({self._subconfig_str(self, 1)})"

    def __getattr__(self, name):
        if name.startswith("_Config__"):
            raise AttributeError(name)
        message = f"'Config' object has no attribute '{name}'."
        if self.__source is not None:
            raise AttributeError(message + f" Please specify '{name}' in {self.__source}.")
        raise AttributeError(message + f" Please specify '{name}' in your config yaml.")

    def _subconfig_str(self, subspace: "Config", tab_depth: int):
        s = ""
        for k, v in Config.items(subspace):
            s += "\n" + "  " * tab_depth + k + ": "
            if isinstance(v, Config):
                s += "\n"
                s += self._subconfig_str(v, tab_depth + 1)[1:]
            else:
                s += str(v)
        return s

    def to_dict(self) -> dict:
        return {k: Config.to_dict(v) if isinstance(v, Config) else v for k, v in Config.items(self)}


def find_yaml_path(file_path: str) -> str:
    """
    Given a file path, this function checks if a YAML file exists with either
    '.yml' or '.yaml' extension, and returns the correct path.

    Args:
        file_path (str): The file path without extension or with either '.yml' or '.yaml' extension.

    Returns:
        str: The correct file path with the existing extension.

    Raises:
        ConfigError: If no YAML file is found with either extension.
    """
    file_path = os.path.expanduser(file_path)
    if os.path.isfile(file_path):
        return file_path
    base_path, _ = os.path.splitext(file_path)

    for candidate in (base_path + ".yml", base_path + ".yaml", file_path + ".yaml", file_path + ".yml"):
        if os.path.isfile(candidate):
            return candidate
    raise ConfigError(f"No YAML file found with either '.yml' or '.yaml' extension for path: {file_path}.")


def open_yaml(path: str) -> dict:
    """
    Read and parse the YAML file located at the given path.

    Args:
        path (str): The file path to the YAML file.

    Returns:
        dict: A dictionary representing the YAML content (empty for an empty file).
    """
    path = find_yaml_path(path)
    try:
        with open(path, "r") as handle:
            content = yaml.safe_load(handle)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: invalid YAML: {err}") from err
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"{path}: top level of a config file must be a mapping")
    return content


def merge_defaults(config: dict, defaults: dict) -> dict:
    """
    Merge `defaults` under `config`: keys present in config win, nested mappings are merged.
    """
    for key, value in defaults.items():
        if key not in config:
            config[key] = value
        elif isinstance(config[key], dict) and isinstance(value, dict):
            merge_defaults(config[key], value)
    return config


def unpack_defaults(config: dict, config_dir: str, seen: Iterable[str] = ()) -> dict:
    """
    Replace the `defaults` entry of a config by the contents of the files it lists.

    Args:
        config (dict): The parsed config.
        config_dir (str): Directory the default paths are relative to.
        seen (Iterable[str]): Files already on the include chain, to reject cycles.
    """
    default_paths = config.pop(DEFAULTS_KEYWORD, None)
    if default_paths is None:
        return config
    if isinstance(default_paths, str):
        default_paths = [default_paths]
    if not isinstance(default_paths, list):
        raise ConfigError(f"The value '{default_paths}' is not valid for {DEFAULTS_KEYWORD}.")

    for default_path in default_paths:
        path = os.path.abspath(find_yaml_path(os.path.join(config_dir, str(default_path))))
        if path in seen:
            raise ConfigError(f"{DEFAULTS_KEYWORD} cycle through {path}")
        default_config = unpack_defaults(open_yaml(path), os.path.dirname(path), (*seen, path))
        merge_defaults(config, default_config)
    return config


def resolve_environment(config: dict) -> dict:
    """
    Resolve `$NAME: fallback` keys to `NAME: <environment value or fallback>`. Values read
    from the environment are parsed as YAML scalars.
    """
    resolved = {}
    for key, value in config.items():
        if isinstance(value, dict):
            value = resolve_environment(value)
        key = str(key)
        if key.startswith(ENV_PREFIX):
            key = key[len(ENV_PREFIX):]
            if key in os.environ:
                value = yaml.safe_load(os.environ[key])
        resolved[key] = value
    return resolved


def load_config(path: str) -> Config:
    """
    Load a YAML config file with its defaults and environment lookups resolved.

    Args:
        path (str): Path to the file, extension optional.

    Returns:
        Config: The loaded configuration.
    """
    path = os.path.abspath(find_yaml_path(path))
    config = unpack_defaults(open_yaml(path), os.path.dirname(path), (path,))
    return Config(resolve_environment(config), source=path)


def parse_overrides(overrides: Iterable[str]) -> dict:
    """
    Parse "dotted.key=value" strings, values as YAML scalars.

    Args:
        overrides (Iterable[str]): Command-line assignments.

    Returns:
        dict: Flat mapping of dotted keys to parsed values.
    """
    parsed = {}
    for override in overrides:
        key, sep, value = override.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override '{override}' must have the form key=value")
        try:
            parsed[key.strip()] = yaml.safe_load(value)
        except yaml.YAMLError as err:
            raise ConfigError(f"override '{override}': {err}") from err
    return parsed


def apply_overrides(config: Config, overrides: Iterable[str]) -> Config:
    return config.update(parse_overrides(overrides))


def config_to_nested_config(flat: dict) -> Config:
    """
    Convert a dictionary with 'key1.keyn' formatted keys into a nested Config object.

    Args:
        flat (dict): The dictionary to be converted.

    Returns:
        Config: A nested Config representation of the input.
    """
    nested_dict: dict = {}
    for key, value in flat.items():
        keys = str(key).split(".")
        current_dict = nested_dict
        for sub_key in keys[:-1]:
            if not isinstance(current_dict.get(sub_key), dict):
                current_dict[sub_key] = {}
            current_dict = current_dict[sub_key]
        current_dict[keys[-1]] = value
    return Config(nested_dict)
