"""
Resolve solver functions named in configuration files.

A config section may point at any importable callable:

    bay_solver:
      _fetch_: bayplan.bay_alloc.greedy_marginal

or bind keyword arguments to it:

    bay_solver:
      _partial_: mypackage.solvers.my_solver
      time_limit: 30
"""
import functools
from typing import Any, Callable, Optional, Union

from .config import Config
from .errors import ConfigError

PARTIAL_KEYWORD: str = "_partial_"
FETCH_KEYWORD: str = "_fetch_"


def import_target(target_string: str) -> Any:
    """
    Dynamically import a class/function using its full module path and name.

    Args:
        target_string (str): The full path to the object, including the module name and the
                             object name, separated by dots.

    Returns:
        Any: The imported object.
    """
    module_name, _, name = str(target_string).rpartition(".")
    if not module_name:
        raise ConfigError(f"'{target_string}' is not a dotted module path")
    try:
        module = __import__(module_name, fromlist=[name])
        return getattr(module, name)
    except (ImportError, AttributeError) as err:
        raise ConfigError(f"cannot import '{target_string}': {err}") from err


def resolve_target(section: Union[Config, dict, str, None], default: Optional[Callable] = None) -> Callable:
    """
    Turn a config section into a callable.

    Args:
        section (Config|dict|str|None): A `_fetch_` or `_partial_` section, a bare dotted path
            (treated as `_fetch_`), or None to use the default.
        default (Callable, optional): Returned when section is None.

    Returns:
        Callable: The resolved function, or a functools.partial binding the extra keys.

    Raises:
        ConfigError: If no valid keyword is found, the target cannot be imported, or a
            `_fetch_` section carries additional arguments.
    """
    if section is None:
        if default is None:
            raise ConfigError("no target configured and no default given")
        return default
    if isinstance(section, str):
        section = {FETCH_KEYWORD: section}
    kwargs = section.to_dict() if isinstance(section, Config) else dict(section)

    if PARTIAL_KEYWORD in kwargs:
        target = import_target(kwargs.pop(PARTIAL_KEYWORD))
        return functools.partial(target, **kwargs)

    if FETCH_KEYWORD in kwargs:
        target = import_target(kwargs.pop(FETCH_KEYWORD))
        if kwargs:
            raise ConfigError(
                f"Error in config: {section}. Configs resolved with the {FETCH_KEYWORD} keyword "
                "cannot have any additional arguments."
            )
        return target

    raise ConfigError(f"No valid target keyword ({FETCH_KEYWORD} or {PARTIAL_KEYWORD}) found in config: {section}")
