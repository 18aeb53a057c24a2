from __future__ import annotations

from fractions import Fraction

import pytest

from spurion import harness as H
from spurion import pdb as P
from spurion.errors import ConfigError

BASE = "generator = STP-standard 2 2\nabstraction_inline = map B <- 3\n"


@pytest.mark.parametrize("text", [
    BASE + "colour = blue\n",
    BASE + "samples = 3\nsamples = 4\n",
    BASE + "samples = many\n",
    BASE + "variants = ORGN, FANCY\n",
    BASE + "variants = ORGN, ORGN\n",
    BASE + "eval = partial\n",
    BASE + "threads = 0\n",
    BASE + "domain = x.psvn\n",
    "generator = STP-standard 2 2\n",
    BASE + "just words\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError) as e:
        H.parse_config(text)
    assert e.value.exit_code == 2


def test_config_files_resolve_relative(tmp_path):
    (tmp_path / "a.abs").write_text("map B <- 3\n")
    (tmp_path / "c.cfg").write_text("generator = STP-standard 2 2\nabstraction = a.abs\noutput = out\n")
    cfg = H.load_config(tmp_path / "c.cfg")
    assert cfg.abstraction == "map B <- 3\n" and cfg.output == tmp_path / "out"
    with pytest.raises(ConfigError):
        H.load_config(tmp_path / "missing.cfg")


def test_goal_only_domain(tmp_path):
    (tmp_path / "g.psvn").write_text("domain g\nalphabet a b\nlength 2\ngoal a b\n")
    cfg = H.parse_config("domain = g.psvn\nabstraction_inline = keep 0\nvariants = ORGN\neval = full\n"
                         "samples = 0\n", tmp_path)
    rep = H.run(cfg, write=False)
    assert [(x.variant, x.entries, x.avg_h) for x in rep.rows] == [(P.ORGN, 1, 0.0)]
    assert H.summary_csv(rep).splitlines()[1].startswith("ORGN,1,")


def test_scanalyzer_low_belts():
    cfg = H.parse_config("generator = Scanalyzer-standard 6\nabstraction_inline = keep belts 0,1,2; "
                         "keep bln_analyzed all\nvariants = ORGN, MTX_EXH, TRUE\nsamples = 0\n")
    rep = H.run(cfg, write=False)
    assert [x.entries for x in rep.rows] == [13_824, 7_680, 7_680]
    assert all(abs(x.avg_h - want) <= 0.01 for x, want in zip(rep.rows, (5.95, 5.99, 5.99)))


def test_toh_row_through_pipeline():
    cfg = H.parse_config("generator = ToH-stack 9 4\nabstraction_inline = map 1 <- 1,7,8,9\n"
                         "variants = ORGN, MTX_EXH, TRUE\nsamples = 0\n")
    rep = H.run(cfg, write=False)
    assert [x.entries for x in rep.rows] == [639_216, 242_520, 80_016]
    assert all(abs(x.avg_h - want) <= 0.01 for x, want in zip(rep.rows, (17.39, 19.18, 20.91)))


def test_outputs(tmp_path):
    cfg = H.parse_config(BASE.replace("2 2", "2 3").replace("B <- 3", "B <- 4,5") +
                         "variants = ORGN, MTX_H2, TRUE, PURE\nsamples = 40\nrng_seed = 2\n")
    cfg.output = tmp_path
    rep = H.run(cfg)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["hist_MTX_H2_vs_orgn.txt", "hist_MTX_H2_vs_true.txt", "hist_ORGN_vs_true.txt",
                     "hist_PURE_vs_orgn.txt",
                     "hist_PURE_vs_true.txt", "hist_TRUE_vs_orgn.txt", "report.txt", "summary.csv"]
    header = (tmp_path / "summary.csv").read_text().splitlines()[0]
    assert header == ",".join(H.CSV_COLUMNS)
    text = (tmp_path / "report.txt").read_text()
    assert f"csv_version {H.CSV_VERSION}" in text and "category" in text
    assert rep.row(P.TRUE).ratio_vs_true.mean_ratio == 1
    assert rep.row(P.ORGN).pct_vs_orgn == 0
    # every variant solves every instance optimally, so lengths agree across rows
    assert len(rep.lengths) == 40
    counts = sum(int(line.split()[1]) for line in (tmp_path / "hist_PURE_vs_true.txt").read_text().splitlines())
    assert counts == sum(1 for n in rep.row(P.TRUE).nodes if n > 0)


def test_node_budget_propagates():
    cfg = H.parse_config(BASE.replace("2 2", "2 3").replace("B <- 3", "B <- 4,5") +
                         "variants = ORGN\nsamples = 20\nmax_nodes = 2\n")
    with pytest.raises(Exception) as e:
        H.run(cfg, write=False)
    assert getattr(e.value, "kind", None) == "node-budget-exceeded"


def test_category_rule():
    assert H.category(10, 5, Fraction(3)) == ("spurious>=nonspurious", "IDA* slow")
    assert H.category(4, 5, 2.0) == ("spurious<nonspurious", "IDA* normal")
    assert H.category(5, 5, "2.01")[1] == "IDA* slow"
    rows = [H.ClassifyRow(10, 5, Fraction(3)), H.ClassifyRow(1, 5, Fraction(2)), H.ClassifyRow(9, 5, Fraction(5))]
    c = H.classify(rows)
    assert c[("spurious>=nonspurious", "IDA* slow")] == 2 and sum(c.values()) == 3
