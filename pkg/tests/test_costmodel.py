import math
from dataclasses import replace

import pytest

from gridtree_core.costmodel import (
    CostParams,
    Measurement,
    fit_and_compare,
    fit_exponent,
    predict_hmerge,
    predict_vmerge,
    render_report,
    sweep,
)
from gridtree_core.dataset import make_partition, synthetic_relation
from gridtree_core.errors import ConfigError, FitError
from gridtree_core.partynet import CostCounters

BASE = CostParams(
    h=3, v=3, tuples=100, attributes=6, classes=2, values=3, key_bits=128, taylor_terms=10
)


def test_params():
    assert BASE.k == 9
    assert BASE.counts_per_attribute == 12
    assert replace(BASE, classes=1, values=1).counts_per_attribute == 4
    assert BASE.to_json()["k"] == 9
    with pytest.raises(ConfigError):
        replace(BASE, h=0)


def test_params_from_run(weather, configuration):
    config = configuration(key_bits=128)
    params = CostParams.from_run(weather, make_partition(weather, 2, 3), config)
    assert params == CostParams(
        h=3, v=2, tuples=14, attributes=4, classes=2, values=3, key_bits=128, taylor_terms=10
    )


def test_hmerge_formula():
    assert predict_hmerge(BASE) == {
        "computation": 6 * (3 + 2 + 3) * 9 * 100 * 128**3,
        "communication": 6 * (3 + 2) * 9 * 100 * 128,
    }
    doubled = predict_hmerge(replace(BASE, h=6))
    assert doubled["communication"] == 4 * predict_hmerge(BASE)["communication"]
    assert doubled["computation"] == 4 * predict_hmerge(BASE)["computation"]
    wider = predict_hmerge(replace(BASE, attributes=12))
    assert wider["communication"] == 2 * predict_hmerge(BASE)["communication"]


def test_vmerge_formula():
    log_t = math.log2(100)
    predicted = predict_vmerge(BASE)
    assert predicted["computation"] == pytest.approx(
        6 * 3 * 12 * 9 * 100 * 128**3 + 6 * 12 * log_t + 6 * log_t + 3 * log_t
    )
    assert predicted["communication"] == pytest.approx(
        6 * 3 * 12 * 9 * 100 * 128 + 6 * 12 * 10 * log_t * 128 + 6 * log_t * 128 + 3 * log_t
    )
    core = predict_vmerge(BASE, include_optional=False)
    assert core["communication"] == pytest.approx(predicted["communication"] - 3 * log_t)
    wider = predict_vmerge(replace(BASE, attributes=12), include_optional=False)
    assert wider["communication"] == pytest.approx(2 * core["communication"])


def test_vmerge_single_tuple():
    predicted = predict_vmerge(replace(BASE, tuples=1))
    assert predicted["computation"] > 0


def test_fit_exponent():
    assert fit_exponent([1, 2, 4, 8], [3, 12, 48, 192]) == pytest.approx(2.0)
    assert fit_exponent([2, 3, 4, 5], [7, 7, 7, 7]) == pytest.approx(0.0)
    with pytest.raises(FitError):
        fit_exponent([1, 2, 2, 4], [1, 2, 2, 4])
    with pytest.raises(FitError):
        fit_exponent([1, 2, 3, 4], [1, 0, 2, 3])


def modelled(strategy, params):
    predict = predict_hmerge if strategy == "grid-hmerge" else predict_vmerge
    comm = predict(params)["communication"]
    counters = CostCounters(messages=params.h * params.v * 10, bytes=int(comm), cipher_ops=1)
    return Measurement(strategy, params, counters)


def synthetic_sweep(fixed=3, tuples=1000):
    base = replace(BASE, tuples=tuples)
    points = [modelled("grid-hmerge", replace(base, v=fixed, h=h)) for h in (5, 2, 4, 3)]
    points += [modelled("grid-vmerge", replace(base, v=v, h=fixed)) for v in (2, 3, 4, 5)]
    return points


def test_fit_and_compare():
    report = fit_and_compare(synthetic_sweep())
    hmerge, vmerge = report["fits"]["grid-hmerge"], report["fits"]["grid-vmerge"]
    assert hmerge["parameter"] == "h"
    assert vmerge["parameter"] == "v"
    assert [p["params"]["h"] for p in hmerge["points"]] == [2, 3, 4, 5]
    assert hmerge["exponents"]["bytes"] == pytest.approx(2.0, abs=1e-3)
    assert hmerge["exponents"]["model_communication"] == pytest.approx(2.0)
    assert hmerge["exponents"]["messages"] == pytest.approx(1.0)
    assert abs(vmerge["exponents"]["bytes"] - 2) < 0.2
    assert hmerge["agrees"] and vmerge["agrees"]
    assert report["verdict"]["cheaper"] == "grid-hmerge"
    (match,) = report["verdict"]["matched"]
    assert (match["params"]["v"], match["params"]["h"]) == (3, 3)
    assert set(report["params"]) == {"grid-hmerge", "grid-vmerge"}


def test_exponent_disagreement_is_reported():
    points = [
        Measurement("grid-hmerge", replace(BASE, h=h), CostCounters(messages=h, bytes=h * 1000))
        for h in (2, 3, 4, 5)
    ]
    fit = fit_and_compare(points)["fits"]["grid-hmerge"]
    assert fit["leading_exponent"] == 2
    assert fit["agrees"] is False


def test_no_matched_configuration():
    points = [p for p in synthetic_sweep() if p.strategy == "grid-hmerge"]
    assert fit_and_compare(points)["verdict"] is None


def test_fit_errors():
    points = synthetic_sweep()
    with pytest.raises(FitError):
        fit_and_compare([p for p in points if p.strategy == "grid-hmerge"][:3])
    with pytest.raises(FitError):
        fit_and_compare([])
    with pytest.raises(FitError):
        fit_and_compare([p._replace(strategy="horizontal") for p in points])
    mixed = [p._replace(params=replace(p.params, tuples=10 * p.params.h)) for p in points[:4]]
    with pytest.raises(FitError):
        fit_and_compare(mixed)


def test_render_report():
    text = render_report(fit_and_compare(synthetic_sweep()))
    assert text.startswith("gridtree cost report")
    assert "grid-hmerge: sweep over h" in text
    assert "grid-vmerge: sweep over v" in text
    assert "leading term exponent 2: agrees" in text
    assert "matched at v=3 h=3" in text
    assert text.rstrip().endswith("cheaper strategy: grid-hmerge")


def test_render_report_without_match():
    points = [p for p in synthetic_sweep() if p.strategy == "grid-vmerge"]
    text = render_report(fit_and_compare(points))
    assert "no matched configuration" in text


@pytest.mark.slow
def test_measured_sweep(configuration):
    relation = synthetic_relation(n_tuples=20, n_attributes=5, n_values=3, seed=7)
    points = sweep(relation, configuration())
    assert len(points) == 8
    hmerge = [p for p in points if p.strategy == "grid-hmerge"]
    vmerge = [p for p in points if p.strategy == "grid-vmerge"]
    assert [p.params.h for p in hmerge] == [2, 3, 4, 5]
    assert all(p.params.v == 3 for p in hmerge)
    assert [p.params.v for p in vmerge] == [2, 3, 4, 5]
    assert all(p.counters.bytes > 0 for p in points)
    report = fit_and_compare(points)
    for strategy in ("grid-hmerge", "grid-vmerge"):
        fit = report["fits"][strategy]
        assert fit["exponents"]["bytes"] == pytest.approx(2.0, abs=0.2)
        assert fit["agrees"]
    at_3x3 = {p.strategy: p.counters.bytes for p in points if (p.params.v, p.params.h) == (3, 3)}
    assert at_3x3["grid-hmerge"] < at_3x3["grid-vmerge"]
    assert report["verdict"]["cheaper"] == "grid-hmerge"
