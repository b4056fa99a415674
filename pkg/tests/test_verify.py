import pytest

from gridtree_core.dataset import Relation
from gridtree_core.id3 import Interior, Leaf, id3_build
from gridtree_core.verify import verify_tree

TAU = 0.0144


@pytest.fixture()
def tied():
    rows = [
        {"id": "1", "a": "x", "b": "x", "c": "p"},
        {"id": "2", "a": "y", "b": "y", "c": "q"},
    ]
    return Relation(("id", "b", "a", "c"), "id", "c", rows)


def test_exact_tree_passes(weather):
    report = verify_tree(id3_build(weather), weather, TAU)
    assert report.verdict == "PASS"
    assert report.exact
    assert report.margin_safe
    assert not report.notes
    assert sorted(c.chosen for c in report.checks) == ["humidity", "outlook", "wind"]


def test_tie_broken_the_other_way(tied):
    tree = Interior("a", {"x": Leaf("p"), "y": Leaf("q")})
    report = verify_tree(tree, tied, TAU)
    assert report.passed
    assert not report.exact
    assert report.verdict == "PASS (margin note)"
    assert len(report.notes) == 1
    assert "chose a where centralized ID3 picks b" in report.notes[0]


def test_exact_tree_with_a_tie(tied):
    report = verify_tree(id3_build(tied), tied, TAU)
    assert report.verdict == "PASS"
    assert not report.margin_safe


def test_wrong_label_fails(weather):
    tree = id3_build(weather)
    children = dict(tree.children, overcast=Leaf("no"))
    report = verify_tree(Interior(tree.attribute, children), weather, TAU)
    assert report.verdict == "FAIL"
    assert report.mismatches == ["outlook=overcast: expected leaf yes, found no"]


def test_wrong_split_fails(weather):
    tree = id3_build(weather)
    wind = Interior("wind", {"strong": Leaf("no"), "weak": Leaf("yes")})
    report = verify_tree(Interior("wind", {"strong": tree, "weak": wind}), weather, TAU)
    assert not report.passed
    assert any("loses" in m for m in report.mismatches)


def test_structural_mismatches(weather):
    report = verify_tree(Leaf("yes"), weather, TAU)
    assert report.mismatches == ["<root>: expected a split, found leaf yes"]
    partial = Interior("outlook", {"sunny": Leaf("no")})
    report = verify_tree(partial, weather, TAU)
    assert report.mismatches == ["<root>: branches do not cover the domain of outlook"]
    report = verify_tree(Interior("play", {}), weather, TAU)
    assert report.mismatches == ["<root>: play is not available at this node"]


def test_report_json(weather):
    data = verify_tree(id3_build(weather), weather, TAU).to_json()
    assert data["verdict"] == "PASS"
    assert data["nodes"][0]["path"] == "<root>"
    assert data["nodes"][0]["gains"]["outlook"] == pytest.approx(0.246750, abs=1e-6)
