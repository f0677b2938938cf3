import json
import math
import os
from pathlib import Path

import pytest

import occbound

MODELS = Path(os.environ.get("OCC_MODELS", Path(__file__).resolve().parents[2] / "models"))


def test_single_site_two_steps():
    model = occbound.load(MODELS / "single_site.json")
    assert model.n == 1
    assert model.kind == "occupancy"
    exact = occbound.exact_marginals(model, 2)
    assert exact[2][0] == pytest.approx(0.45, abs=1e-15)
    assert occbound.mean_field(model, 2)[2][0] == pytest.approx(0.45, abs=1e-15)


def test_interacting_pair_reports():
    model = occbound.load(MODELS / "interacting_pair.json")
    assert occbound.exact_marginals(model, 2)[2] == pytest.approx([0.388, 0.388], abs=1e-15)
    report = occbound.check(model)
    assert report["verdict"] == "pass"
    bound = occbound.marginal_bound(model, 10)
    assert bound["verdict"] == "pass"
    assert bound["worst_margin"] >= -1e-10
    path = occbound.path_orthant(model, 4)
    assert path["single_site"]["verdict"] == "pass"
    assert path["decomposition_gap"] < 1e-14
    single = occbound.single_time_orthant(model, 3)
    assert single["harris"]["worst_margin"] >= -1e-10


def test_and_table_fails_check():
    report = occbound.check(occbound.load(MODELS / "and_table.json"))
    assert report["verdict"] == "fail"


def test_simulation_matches_exact_and_is_reproducible():
    model = occbound.load(MODELS / "interacting_pair.json")
    a = occbound.simulate(model, 5, reps=20000, seed=4)
    b = occbound.simulate(model, 5, reps=20000, seed=4)
    assert a == b
    exact = occbound.exact_marginals(model, 5)
    for t in range(6):
        for i in range(2):
            assert abs(a["mean"][t][i] - exact[t][i]) <= 4 * a["se"][t][i] + 1e-12
    assert occbound.monotone_violations(model, 10, reps=2000) == 0


def test_spin_model_and_bridge():
    model = occbound.load(MODELS / "two_state.json")
    assert model.kind == "spin"
    ode = occbound.mean_field_ode(model, [0.0, 1.0], step=1e-3)
    law = occbound.spin_marginals(model, [0.0, 1.0])
    assert law[1][0] == pytest.approx(ode[1][0], abs=1e-8)
    contact = occbound.load(MODELS / "contact_triangle.json")
    rows = occbound.convergence(contact, 1.0)
    tv = [v for _, metric, v in rows if metric == "tv_distance"]
    assert len(tv) == 5
    assert all(b < a for a, b in zip(tv, tv[1:]))
    disc = occbound.discretise(contact, 0.0625)
    assert disc.kind == "occupancy"
    assert occbound.check(disc)["verdict"] == "pass"


def test_errors():
    with pytest.raises(occbound.ModelFormatError):
        occbound.Model.from_json('{"n": 1,')
    with pytest.raises(ValueError):
        occbound.exact_marginals(occbound.load(MODELS / "two_state.json"), 2)
    with pytest.raises(occbound.AdmissibilityError):
        occbound.discretise(occbound.load(MODELS / "contact_triangle.json"), 10.0)


def test_model_round_trip():
    model = occbound.load(MODELS / "metapopulation.json")
    again = occbound.Model.from_json(model.to_json())
    assert json.loads(again.to_json()) == json.loads(model.to_json())
    assert math.isfinite(occbound.mean_field(again, 3)[3][0])
