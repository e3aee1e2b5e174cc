# src/utils/config_file.py

import json
import os
from typing import Any, Dict


def read_settings(path: str) -> Dict[str, Any]:
    """
    Read a settings file: a JSON object, or `key=value` lines.

    In the line format blank lines and lines starting with `#` are skipped
    and values stay strings; callers coerce them.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If a line has no `=` or JSON is not an object
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path) as f:
        text = f.read()

    if text.lstrip().startswith('{'):
        settings = json.loads(text)
        if not isinstance(settings, dict):
            raise ValueError("JSON config must be an object")
        return settings

    settings: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ValueError(f"{path}:{number}: expected key=value, got {line!r}")
        key, value = line.split('=', 1)
        settings[key.strip().replace('-', '_')] = value.strip()
    return settings
