import json
import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent.parent
CRITERION4 = REPO / ".acceptance" / "criterion4"


def _generate_protected_artifacts(out: Path) -> None:
    """Fall back to a fast protected run via the solver CLI."""
    config = {
        "game": {
            "name": "grid-skirmish",
            "width": 3,
            "height": 3,
            "units": {
                "p1": [{"type": "infantry", "pos": [0, 1]}],
                "p2": [{"type": "infantry", "pos": [2, 1]}],
            },
            "duration": 2,
            "cities": [[1, 1]],
        },
        "protect": {"p1": ["greedy-shoot", "city-holder"], "p2": ["greedy-shoot", "city-holder"]},
        "exit": {"temper_off_episode": 200, "max_episodes": 50000},
        "temperatures": [0.0, 0.5, 2.0, 8.0],
        "seed": 21,
        "output_dir": str(out),
    }
    cfg = out / "config.json"
    out.mkdir(parents=True, exist_ok=True)
    cfg.write_text(json.dumps(config))
    subprocess.run([sys.executable, "-m", "turnq.cli", "train", str(cfg)], check=True)


@pytest.fixture(scope="session")
def protected_artifacts(tmp_path_factory) -> Path:
    """A converged protected run's CSVs: the big acceptance run if present."""
    if (CRITERION4 / "train.csv").exists() and (CRITERION4 / "eval.csv").exists():
        return CRITERION4
    out = tmp_path_factory.mktemp("protected-run")
    _generate_protected_artifacts(out)
    return out
