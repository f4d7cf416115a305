import io
import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

YEARS = list(range(2000, 2025))


def synthetic_long_csv(n_countries=12, n_indicators=30, seed=0, extras=True):
    """Panel with a shared trend so correlations mix strong synergies and trade-offs."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, len(YEARS))
    lines = ["country_code,indicator_id,sdg_goal,year,value"]
    for c in range(n_countries):
        code = f"C{c:02d}"
        for k in range(n_indicators):
            sign = 1.0 if rng.random() < 0.65 else -1.0
            level = rng.uniform(30, 70)
            slope = rng.uniform(5, 25) * sign
            noise = rng.normal(0, rng.uniform(0.5, 6.0), len(YEARS))
            vals = np.clip(level + slope * t + noise, 0, 100).round(1)
            goal = 1 + k % 17
            for y, v in zip(YEARS, vals):
                lines.append(f"{code},ind{k:02d},{goal},{y},{v}")
        if extras:
            for y in YEARS:
                lines.append(f"{code},flat,5,{y},37.0")
                v = "" if y == 2013 else "50.0"
                lines.append(f"{code},gappy,6,{y},{v}")
    return "\n".join(lines) + "\n"


def synthetic_scores(n_countries=12):
    scores = [42.0, 65.0, 85.0]
    lines = ["country_code,sdg_index_score"]
    for c in range(n_countries):
        lines.append(f"C{c:02d},{scores[c % 3]}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def panel_text():
    return synthetic_long_csv()


@pytest.fixture
def workspace(tmp_path):
    """Panel + scores + config on disk; returns the config path."""
    (tmp_path / "panel.csv").write_text(synthetic_long_csv())
    (tmp_path / "scores.csv").write_text(synthetic_scores())
    cfg = {
        "panel_path": "panel.csv",
        "scores_path": "scores.csv",
        "out_dir": "out",
        "seed": 7,
    }
    (tmp_path / "config.json").write_text(json.dumps(cfg))
    return tmp_path / "config.json"
