"""Prevention and treatment suggestions keyed by disease and predicted label.

The texts live in data/advice.json so they can be edited without touching
code. Every returned string ends with the fixed disclaimer; unknown
disease/label pairs fall back to generic guidance rather than failing.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def _table() -> dict:
    text = resources.files("medpredict").joinpath("data/advice.json").read_text(encoding="utf-8")
    return json.loads(text)


def advice_for(disease: str, label: str) -> str:
    table = _table()
    entry = table.get(disease, {}).get(str(label)) or table["_fallback"]
    return f"{entry} {table['_disclaimer']}"
