import random

import pytest

from gridtree_core.configuration import GridTreeConfiguration
from gridtree_core.dataset import Relation, fragments, make_partition, synthetic_relation
from gridtree_core.errors import (
    ConfigError,
    DanglingNode,
    Forbidden,
    IncompleteGrid,
    TooFewParties,
    UnseenValue,
)
from gridtree_core.id3 import classify_plain, id3_build
from gridtree_core.partynet import Network, PartyId
from gridtree_core.protocols import (
    DistributedTree,
    audit_visibility,
    classify_distributed,
    induce,
    render_plaintext,
    render_skeleton,
)
from gridtree_core.protocols.tree import SKELETON_FILE, payload_filename
from gridtree_core.verify import verify_tree

SHAPES = [("horizontal", 1, 3), ("grid-hmerge", 3, 3), ("grid-vmerge", 3, 3)]


def run(strategy, relation, v, h, configuration, **kwargs):
    partition = make_partition(relation, v, h, seed=3)
    result = induce(strategy, partition, fragments(relation, partition), configuration(**kwargs))
    return partition, result


@pytest.mark.parametrize("strategy, v, h", SHAPES)
def test_weather_matches_id3(weather, configuration, strategy, v, h):
    partition, result = run(strategy, weather, v, h, configuration, key_bits=128)
    assert render_plaintext(result.tree, test_mode=True) == id3_build(weather)
    assert audit_visibility(result.network, partition, weather) == []


@pytest.mark.parametrize(
    "strategy, v, h",
    [("horizontal", 1, 4), ("grid-hmerge", 2, 2), ("grid-hmerge", 4, 3), ("grid-vmerge", 2, 2)],
)
@pytest.mark.parametrize("seed", [0, 1])
def test_synthetic_matches_id3(configuration, strategy, v, h, seed):
    rel = synthetic_relation(n_tuples=16, n_attributes=4, n_values=2, seed=seed, noise=0.3)
    partition, result = run(strategy, rel, v, h, configuration)
    assert render_plaintext(result.tree, test_mode=True) == id3_build(rel)
    assert audit_visibility(result.network, partition, rel) == []


@pytest.mark.slow
@pytest.mark.parametrize("strategy, v, h", [("horizontal", 1, 5), ("grid-vmerge", 3, 4)])
def test_larger_synthetic_matches_id3(configuration, strategy, v, h):
    rel = synthetic_relation(n_tuples=40, n_attributes=5, n_values=3, seed=5, noise=0.2)
    _, result = run(strategy, rel, v, h, configuration, n_splits=1)
    assert render_plaintext(result.tree, test_mode=True) == id3_build(rel)


@pytest.fixture()
def long_values():
    jobs = ["self-employed-contractor", "salaried-public-servant"]
    labels = {jobs[0]: "approved-after-review", jobs[1]: "declined-automatically"}
    rows = [
        {
            "customer": f"customer-{n:012d}",
            "occupation": jobs[n % 2],
            "region": ["north-eastern-province", "south-western-province"][n // 2 % 2],
            "decision": labels[jobs[n % 2]],
        }
        for n in range(12)
    ]
    return Relation(("customer", "occupation", "region", "decision"), "customer", "decision", rows)


@pytest.mark.parametrize(
    "strategy, v, h", [("horizontal", 1, 3), ("grid-hmerge", 2, 2), ("grid-vmerge", 2, 2)]
)
def test_long_values_at_default_settings(long_values, strategy, v, h):
    partition = make_partition(long_values, v, h, seed=3)
    result = induce(
        strategy, partition, fragments(long_values, partition), GridTreeConfiguration()
    )
    assert render_plaintext(result.tree, test_mode=True) == id3_build(long_values)
    assert audit_visibility(result.network, partition, long_values) == []


@pytest.mark.parametrize("strategy, v, h", [("horizontal", 1, 3), ("grid-vmerge", 2, 3)])
def test_split_sums(synthetic, configuration, strategy, v, h):
    _, one = run(strategy, synthetic, v, h, configuration, n_splits=1)
    _, three = run(strategy, synthetic, v, h, configuration, n_splits=3)
    assert one.transcript != three.transcript
    assert not one.transcript.with_tag("round2")
    assert three.transcript.with_tag("sum/round2/ring")
    assert render_plaintext(three.tree, test_mode=True) == id3_build(synthetic)


def test_runs_are_deterministic(synthetic, configuration):
    _, first = run("grid-hmerge", synthetic, 2, 3, configuration)
    _, second = run("grid-hmerge", synthetic, 2, 3, configuration)
    assert first.transcript == second.transcript
    assert first.tree.skeleton_json() == second.tree.skeleton_json()
    _, other = run("grid-hmerge", synthetic, 2, 3, configuration, seed=2)
    assert other.tree.run_id != first.tree.run_id


def test_skeleton_is_public_only(weather, configuration):
    partition, result = run("grid-vmerge", weather, 2, 2, configuration, key_bits=128)
    text = str(render_skeleton(result.tree))
    for token in ("outlook", "humidity", "sunny", "yes", "no"):
        assert f"'{token}'" not in text
    root = result.tree.node(result.tree.root)
    assert root.kind == "interior"
    assert root.owner == partition.group_of("outlook")


def test_leaves_live_with_the_class_holders(synthetic, configuration):
    partition, result = run("grid-vmerge", synthetic, 2, 2, configuration)
    tree = result.tree
    leaves = [n for n in tree.nodes.values() if n.kind == "leaf"]
    assert leaves
    assert {n.owner for n in leaves} == {2}
    for n in leaves:
        assert all(n.node_id in tree.payloads[PartyId(2, j)] for j in (1, 2))
        assert n.node_id not in tree.payloads[PartyId(1, 1)]


def owner_changes(tree, row_parts):
    changes, current, owner = 0, tree.root, None
    while True:
        node = tree.node(current)
        if owner is not None and node.owner != owner:
            changes += 1
        owner = node.owner
        payload = tree.payloads[PartyId(owner, 1)][current]
        if node.kind == "leaf":
            return changes
        current = payload.branches[row_parts[PartyId(owner, 1)][payload.attribute]]


@pytest.mark.parametrize("strategy, v, h", SHAPES)
def test_classify_distributed(weather, configuration, strategy, v, h):
    partition, result = run(strategy, weather, v, h, configuration, key_bits=128)
    plain = id3_build(weather)
    net = Network(partition.party_ids(), seed=1)
    expected_hops = 0
    for row in weather.rows:
        row_parts = {
            PartyId(i, 1): {a: row[a] for a in partition.attr_groups[i - 1]}
            for i in range(1, partition.v + 1)
        }
        assert classify_distributed(result.tree, net, row_parts) == classify_plain(plain, row)
        expected_hops += owner_changes(result.tree, row_parts)
    net.close()
    assert len(net.transcript.with_tag("control")) == expected_hops
    if strategy != "horizontal":
        assert expected_hops > 0


def test_classify_errors(weather, configuration):
    partition, result = run("grid-hmerge", weather, 2, 2, configuration, key_bits=128)
    net = Network(partition.party_ids())
    spread = {PartyId(1, 1): {}, PartyId(2, 2): {}}
    with pytest.raises(UnseenValue):
        classify_distributed(result.tree, net, spread)
    foggy = {PartyId(i, 1): {a: "foggy" for a in partition.attr_groups[i - 1]} for i in (1, 2)}
    with pytest.raises(UnseenValue):
        classify_distributed(result.tree, net, foggy)
    with pytest.raises(DanglingNode):
        classify_distributed(result.tree, net, foggy, start="missing")


def test_render_needs_test_mode(synthetic, configuration):
    _, result = run("grid-hmerge", synthetic, 2, 2, configuration)
    with pytest.raises(Forbidden):
        render_plaintext(result.tree)


def test_save_and_load(synthetic, configuration, tmp_path):
    _, result = run("grid-vmerge", synthetic, 2, 2, configuration)
    result.tree.save(tmp_path)
    assert (tmp_path / SKELETON_FILE).exists()
    assert (tmp_path / payload_filename(PartyId(2, 2))).exists()
    loaded = DistributedTree.load(tmp_path)
    assert loaded.skeleton_json() == result.tree.skeleton_json()
    assert render_plaintext(loaded, test_mode=True) == render_plaintext(result.tree, test_mode=True)


def test_load_incomplete(synthetic, configuration, tmp_path):
    _, result = run("grid-hmerge", synthetic, 2, 2, configuration)
    result.tree.save(tmp_path)
    (tmp_path / payload_filename(PartyId(1, 2))).write_text("{not json")
    with pytest.raises(IncompleteGrid) as info:
        DistributedTree.load(tmp_path)
    assert info.value.exit_code == 2
    (tmp_path / payload_filename(PartyId(1, 2))).unlink()
    with pytest.raises(IncompleteGrid) as info:
        DistributedTree.load(tmp_path)
    assert "missing" in str(info.value)


@pytest.mark.parametrize(
    "strategy, v, h, error",
    [
        ("grid-hmerge", 3, 1, ConfigError),
        ("grid-vmerge", 1, 3, ConfigError),
        ("horizontal", 2, 3, ConfigError),
        ("horizontal", 1, 2, TooFewParties),
        ("id4", 1, 3, ConfigError),
    ],
)
def test_bad_shapes(weather, configuration, strategy, v, h, error):
    with pytest.raises(error):
        run(strategy, weather, v, h, configuration, key_bits=128)


def test_transcript_costs(synthetic, configuration):
    _, hmerge = run("grid-hmerge", synthetic, 2, 2, configuration, pad_policy="total")
    _, vmerge = run("grid-vmerge", synthetic, 2, 2, configuration, pad_policy="total")
    assert hmerge.transcript.with_tag("grid-hmerge/setup")
    assert vmerge.transcript.with_tag("count")
    for result in (hmerge, vmerge):
        assert all(e.nbits > 0 for e in result.transcript)
        rounds = [e.round for e in result.transcript]
        assert rounds == sorted(rounds)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_random_relations(configuration, seed):
    rng = random.Random(f"oracle/{seed}")
    n_attributes = rng.randrange(2, 9)
    rel = synthetic_relation(
        n_tuples=rng.randrange(8, 61),
        n_attributes=n_attributes,
        n_values=rng.randrange(2, 4),
        n_classes=rng.randrange(2, 4),
        seed=seed,
        noise=rng.choice([0.0, 0.2, 0.4]),
    )
    config = configuration(seed=seed)
    plain = id3_build(rel)
    shapes = [
        ("horizontal", 1, rng.randrange(3, 5)),
        ("grid-hmerge", rng.randrange(2, min(n_attributes, 3) + 1), rng.randrange(2, 4)),
        ("grid-vmerge", rng.randrange(2, min(n_attributes, 3) + 1), rng.randrange(2, 4)),
    ]
    for strategy, v, h in shapes:
        partition = make_partition(rel, v, h, seed=seed)
        result = induce(strategy, partition, fragments(rel, partition), config)
        rendered = render_plaintext(result.tree, test_mode=True)
        report = verify_tree(rendered, rel, config.tau_gain)
        assert report.passed, report.mismatches
        if report.margin_safe:
            assert rendered == plain
        assert audit_visibility(result.network, partition, rel) == []

        net = Network(partition.party_ids(), seed=seed)
        hops = 0
        for row in rel.rows:
            row_parts = {
                PartyId(i, 1): {a: row[a] for a in partition.attr_groups[i - 1]}
                for i in range(1, v + 1)
            }
            assert classify_distributed(result.tree, net, row_parts) == classify_plain(
                rendered, row
            )
            hops += owner_changes(result.tree, row_parts)
        assert len(net.transcript.with_tag("control")) == hops


@pytest.mark.slow
@pytest.mark.parametrize(
    "strategy, v, h", [("horizontal", 1, 4), ("grid-hmerge", 3, 2), ("grid-vmerge", 3, 2)]
)
def test_largest_relation(configuration, strategy, v, h):
    rel = synthetic_relation(n_tuples=200, n_attributes=8, n_values=3, seed=8)
    partition = make_partition(rel, v, h, seed=8)
    result = induce(strategy, partition, fragments(rel, partition), configuration())
    rendered = render_plaintext(result.tree, test_mode=True)
    report = verify_tree(rendered, rel, configuration().tau_gain)
    assert report.passed, report.mismatches
    if report.margin_safe:
        assert rendered == id3_build(rel)
