import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ldgdefect.config import parse_config  # noqa: E402
from ldgdefect.field import GridSpec, hedgehog_field, sample  # noqa: E402
from ldgdefect.material import MaterialParams  # noqa: E402
from ldgdefect.pipeline import run_experiment  # noqa: E402
from ldgdefect.solver import SolverConfig, minimize  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def canonical_run(tmp_path_factory):
    """The canonical ladder (eps 0.2, 0.1, 0.05 at n=64); about 40 s."""
    text = (ROOT / "configs" / "canonical.json").read_text()
    cfg = parse_config(json.loads(text))
    out = tmp_path_factory.mktemp("canonical")
    report, code = run_experiment(cfg, text, out)
    return report, code, out


@pytest.fixture(scope="session")
def small_minimizer():
    """Hedgehog ball problem at n=32, eps=0.2."""
    p = MaterialParams(eps=0.2)
    fld = sample(GridSpec(n_cells=32), lambda x: hedgehog_field(x, p.s_plus), ball_radius=1.0)
    rep = minimize(fld, p, SolverConfig(grad_tol=1e-5))
    return fld, p, rep


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
