# edgebench/utils.py

import configparser
import logging
import os

DEFAULT_CONFIG_PATH = '~/edgebench/config.ini'
THREADS_ENV_VAR = 'EDGEBENCH_THREADS'

_LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def load_config(section, key, fallback=None, config_path=DEFAULT_CONFIG_PATH):
    """
    Load a configuration value from the config file.

    Args:
    section (str): The section in the config file.
    key (str): The key for the config value.
    fallback (Any, optional): Returned when the file, section or key is missing.
    config_path (str, optional): Path to the config file. Defaults to '~/edgebench/config.ini'.

    Returns:
    The value from the config file (a string), or the fallback value if not found.
    """
    config = configparser.ConfigParser()
    expanded_config_file_path = os.path.expanduser(config_path)

    if not os.path.exists(expanded_config_file_path):
        if fallback is not None:
            return fallback
        raise FileNotFoundError(f"Config file not found at {expanded_config_file_path}")

    config.read(expanded_config_file_path)

    # sections and keys are matched case-insensitively
    section = section.lower()
    key = key.lower()

    for config_section in config.sections():
        if config_section.lower() == section:
            for config_key, value in config[config_section].items():
                if config_key.lower() == key:
                    return value

    if fallback is not None:
        return fallback

    raise ValueError(f"Key '{key}' not found in section '{section}' of the config file")


def setup_logging(level='INFO'):
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=_LOG_FORMAT)


def _thread_count(raw):
    if raw is None or str(raw).strip() == '':
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"Invalid thread count: {raw!r}")
    if value < 1:
        raise ValueError(f"Thread count must be at least 1, got {value}")
    return value


def resolve_threads(configured=None):
    """
    Worker count. EDGEBENCH_THREADS caps the configured value; either one
    alone is used as is, and with neither set the count is os.cpu_count().
    """
    counts = [c for c in (_thread_count(os.environ.get(THREADS_ENV_VAR)), _thread_count(configured))
              if c is not None]
    return min(counts) if counts else os.cpu_count() or 1
