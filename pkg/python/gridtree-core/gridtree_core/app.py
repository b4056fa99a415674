import json
from pathlib import Path

import pandas as pd
from traitlets import Enum, Int, List, Unicode
from traitlets.config import Application

from ._version import __version__
from .configuration import STRATEGIES, GridTreeConfiguration, check_strategy
from .costmodel import (
    PREDICTORS,
    CostParams,
    fit_and_compare,
    render_report,
    sweep,
)
from .dataset import (
    PARTITION_FILE,
    fragments,
    load_relation,
    load_tuples,
    make_partition,
    read_fragments,
    read_partition,
    reassemble,
    synthetic_relation,
    write_fragments,
)
from .errors import GridTreeError, VerificationFailed
from .partynet import Network, PartyId, snapshot_counters
from .protocols import DistributedTree, classify_distributed, induce, render_plaintext
from .verify import verify_tree

TRANSCRIPT_FILE = "transcript.jsonl"
COST_FILE = "cost.json"
VERIFY_FILE = "verify.json"
PREDICTIONS_FILE = "predictions.csv"
REPORT_FILE = "report.json"
REPORT_TEXT_FILE = "report.txt"

config_aliases = {
    "log-level": "Application.log_level",
    "seed": "GridTreeConfiguration.seed",
    "key-bits": "GridTreeConfiguration.key_bits",
    "taylor-terms": "GridTreeConfiguration.taylor_terms",
    "fixed-point-bits": "GridTreeConfiguration.fixed_point_bits",
    "n-splits": "GridTreeConfiguration.n_splits",
    "agreed-size": "GridTreeConfiguration.agreed_size",
    "pad-policy": "GridTreeConfiguration.pad_policy",
}


def _write_json(path: Path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


class GridTreeBaseApp(Application):
    """Shared traits and error handling of the gridtree subcommands."""

    version = __version__
    classes = [GridTreeConfiguration]

    input = Unicode("", help="Input CSV file or fragment directory.").tag(config=True)
    id_col = Unicode("id", help="Name of the key attribute.").tag(config=True)
    class_col = Unicode("class", help="Name of the class attribute.").tag(config=True)
    out = Unicode("gridtree_out", help="Output directory.").tag(config=True)

    @property
    def out_dir(self) -> Path:
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        return out

    @property
    def input_path(self) -> Path:
        return Path(self.input) if self.input else self.out_dir

    def run_command(self, configuration: GridTreeConfiguration):
        raise NotImplementedError

    def start(self):
        try:
            configuration = GridTreeConfiguration(parent=self)
            self.run_command(configuration)
        except GridTreeError as e:
            self.log.error("%s: %s", type(e).__name__, e)
            self.exit(e.exit_code)
        self.exit(0)


def _aliases(app_name, **extra):
    aliases = dict(config_aliases)
    for name in ("input", "id-col", "class-col", "out"):
        aliases[name] = f"{app_name}.{name.replace('-', '_')}"
    aliases.update(extra)
    return aliases


class GridTreePartitionApp(GridTreeBaseApp):
    """split a relation into a grid of fragment files"""

    aliases = _aliases(
        "GridTreePartitionApp",
        v="GridTreePartitionApp.v",
        **{"h-groups": "GridTreePartitionApp.h_groups"},
    )

    v = Int(1, help="Number of vertical groups.").tag(config=True)
    h_groups = Int(3, help="Number of horizontal groups.").tag(config=True)

    def run_command(self, configuration):
        relation = load_relation(self.input, self.id_col, self.class_col)
        partition = make_partition(relation, self.v, self.h_groups, seed=configuration.seed)
        written = write_fragments(partition, fragments(relation, partition), self.out_dir)
        self.log.info("wrote %d fragments to %s", len(written), self.out_dir)


class GridTreeRunApp(GridTreeBaseApp):
    """induce a distributed decision tree over fragment files"""

    aliases = _aliases("GridTreeRunApp", strategy="GridTreeRunApp.strategy")

    strategy = Enum(
        list(STRATEGIES), default_value="grid-hmerge", help="Protocol to run."
    ).tag(config=True)

    def run_command(self, configuration):
        partition, parts = read_fragments(self.input_path)
        check_strategy(self.strategy, partition.v, partition.h)
        result = induce(self.strategy, partition, parts, configuration)
        out = self.out_dir
        result.tree.save(out)
        _write_json(out / PARTITION_FILE, partition.to_json())
        (out / TRANSCRIPT_FILE).write_text(result.transcript.to_jsonl())
        counters = snapshot_counters(result.transcript)
        cost = {"strategy": self.strategy, "measured": counters.to_json()}
        if self.strategy in PREDICTORS:
            params = CostParams.from_run(reassemble(partition, parts), partition, configuration)
            cost["params"] = params.to_json()
            cost["predicted"] = PREDICTORS[self.strategy](params)
        _write_json(out / COST_FILE, cost)
        self.log.info(
            "%s: %d nodes, %d messages, %d bytes",
            self.strategy,
            len(result.tree),
            counters.messages,
            counters.bytes,
        )


class GridTreeVerifyApp(GridTreeBaseApp):
    """compare an induced tree with centralized ID3"""

    aliases = _aliases("GridTreeVerifyApp")

    def run_command(self, configuration):
        partition, parts = read_fragments(self.input_path)
        relation = reassemble(partition, parts)
        tree = DistributedTree.load(self.out_dir)
        self.log.debug("rendering tree %s with every party's payloads", tree.run_id)
        plain = render_plaintext(tree, test_mode=True)
        report = verify_tree(plain, relation, configuration.tau_gain)
        _write_json(self.out_dir / VERIFY_FILE, report.to_json())
        for note in report.notes:
            self.log.warning(note)
        if not report.passed:
            for mismatch in report.mismatches:
                self.log.error(mismatch)
            raise VerificationFailed(f"{len(report.mismatches)} node(s) differ from ID3")
        print(report.verdict)


class GridTreeReportApp(GridTreeBaseApp):
    """measure both grid protocols over a sweep and fit their cost exponents"""

    aliases = _aliases(
        "GridTreeReportApp",
        **{
            "h-values": "GridTreeReportApp.h_values",
            "v-values": "GridTreeReportApp.v_values",
            "fixed-v": "GridTreeReportApp.fixed_v",
            "fixed-h": "GridTreeReportApp.fixed_h",
            "tuples": "GridTreeReportApp.tuples",
            "attributes": "GridTreeReportApp.attributes",
        },
    )

    h_values = List(Int(), [2, 3, 4, 5], help="h values swept for grid-hmerge.").tag(config=True)
    v_values = List(Int(), [2, 3, 4, 5], help="v values swept for grid-vmerge.").tag(config=True)
    fixed_v = Int(3, help="v held fixed during the h sweep.").tag(config=True)
    fixed_h = Int(3, help="h held fixed during the v sweep.").tag(config=True)
    tuples = Int(24, help="Tuples of the synthetic relation used without --input.").tag(
        config=True
    )
    attributes = Int(5, help="Attributes of the synthetic relation.").tag(config=True)

    def run_command(self, configuration):
        if self.input:
            relation = load_relation(self.input, self.id_col, self.class_col)
        else:
            relation = synthetic_relation(
                n_tuples=self.tuples, n_attributes=self.attributes, seed=configuration.seed
            )
        points = sweep(
            relation,
            configuration,
            h_values=self.h_values,
            v_values=self.v_values,
            fixed_v=self.fixed_v,
            fixed_h=self.fixed_h,
        )
        report = fit_and_compare(points)
        _write_json(self.out_dir / REPORT_FILE, report)
        text = render_report(report)
        (self.out_dir / REPORT_TEXT_FILE).write_text(text)
        print(text)


class GridTreeClassifyApp(GridTreeBaseApp):
    """classify tuples by walking a distributed tree"""

    aliases = _aliases("GridTreeClassifyApp", tree="GridTreeClassifyApp.tree")

    tree = Unicode("", help="Directory of a run; defaults to --out.").tag(config=True)

    def run_command(self, configuration):
        tree_dir = Path(self.tree) if self.tree else self.out_dir
        tree = DistributedTree.load(tree_dir)
        partition = read_partition(tree_dir)
        rows = load_tuples(self.input, self.id_col)
        net = Network(partition.party_ids(), seed=configuration.seed, parent=self)
        predictions = []
        for row in rows:
            row_parts = {
                PartyId(i, 1): {a: row[a] for a in partition.attr_groups[i - 1] if a in row}
                for i in range(1, partition.v + 1)
            }
            label = classify_distributed(tree, net, row_parts)
            predictions.append({self.id_col: row[self.id_col], "predicted": label})
        net.close()
        path = self.out_dir / PREDICTIONS_FILE
        pd.DataFrame(predictions, columns=[self.id_col, "predicted"]).to_csv(path, index=False)
        self.log.info(
            "classified %d tuples with %d control hand-overs",
            len(predictions),
            len(net.transcript),
        )


class GridTreeApp(Application):
    """privacy-preserving ID3 over grid-partitioned data"""

    name = "gridtree"
    version = __version__
    description = "Induce ID3 decision trees over horizontally, vertically or grid partitioned data"

    __sub_apps = dict(
        partition=GridTreePartitionApp,
        run=GridTreeRunApp,
        verify=GridTreeVerifyApp,
        report=GridTreeReportApp,
        classify=GridTreeClassifyApp,
    )

    subcommands = {k: (v, v.__doc__.splitlines()[0].strip()) for k, v in __sub_apps.items()}

    def start(self):
        if self.subapp is None:
            self.print_subcommands()
            self.exit(2)
        super().start()


main = launch_new_instance = GridTreeApp.launch_instance

if __name__ == "__main__":  # pragma: nocover
    main()
