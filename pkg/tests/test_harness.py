import threading

import numpy as np
import pytest

from accumsel import ExperimentConfig, SyntheticSpec, generate_synthetic, make_5x2_plan, run_experiment, write_report
from accumsel.dataset import DataError
from accumsel.harness import ExperimentReport, FoldResult, build_config, parse_config_text, read_report

SPEC = SyntheticSpec(120, 3, 9, 3.0, 0)


@pytest.fixture(scope="module")
def report():
    return run_experiment(ExperimentConfig(synthetic=SPEC))


class LeakAudit:
    """Records, per outer fold and phase, which original rows were seen."""

    def __init__(self, n_rows, outer_seed=0, labels=None):
        self.plan = {f: (set(tr.tolist()), set(te.tolist()))
                     for f, _, _, tr, te in make_5x2_plan(labels, outer_seed).orientations()}
        self.seen = []
        self.lock = threading.Lock()

    def __call__(self, phase, fold, dataset):
        with self.lock:
            self.seen.append((phase, fold, set(dataset.sample_ids.tolist())))

    def violations(self):
        bad = []
        for phase, fold, ids in self.seen:
            if phase in ("prefilter", "search"):
                if fold < 0:
                    bad.append((phase, fold))  # ranked on every row before any split
                elif ids & self.plan[fold][1]:
                    bad.append((phase, fold))
        return bad


def test_ten_rows_per_algorithm(report):
    assert report.algorithms == ("sbg", "sbg+")
    for alg in report.algorithms:
        rows = report.for_algorithm(alg)
        assert [r.fold for r in rows] == list(range(10))
        assert all(r.call_count == 12 * 13 // 2 for r in rows)
        assert all(0 <= r.test_error <= 1 for r in rows)


def test_planted_problem_is_easy(report):
    assert report.mean_error("sbg") <= 0.15
    assert report.mean_error("sbg+") <= 0.15
    assert report.mean_size("sbg+") <= report.mean_size("sbg") + 2


def test_members_match_sizes(report):
    names = set(generate_synthetic(SPEC).feature_names)
    for r in report.rows:
        assert len(r.subset_members) == r.subset_size
        assert set(r.subset_members) <= names


def test_means_consistent_with_rows(report):
    for alg in report.algorithms:
        errs = [r.test_error for r in report.for_algorithm(alg)]
        assert abs(report.mean_error(alg) - sum(errs) / 10) <= 1e-12
    diffs = report.paired_differences()
    assert len(diffs) == 10
    mean_diff = sum(d for _, d, _ in diffs) / 10
    assert abs(mean_diff - (report.mean_error("sbg+") - report.mean_error("sbg"))) <= 1e-12


def test_lambda_zero_gives_identical_columns():
    rep = run_experiment(ExperimentConfig(synthetic=SyntheticSpec(60, 2, 5, 2.0, 1), lam=0.0))
    for a, b in zip(rep.for_algorithm("sbg"), rep.for_algorithm("sbg+")):
        assert (a.test_error, a.subset_members) == (b.test_error, b.subset_members)


def test_deterministic_and_thread_independent():
    cfg = ExperimentConfig(synthetic=SyntheticSpec(60, 2, 5, 2.0, 2))
    a = run_experiment(cfg)
    b = run_experiment(ExperimentConfig(synthetic=SyntheticSpec(60, 2, 5, 2.0, 2), threads=4))
    assert a.rows == b.rows


def test_forward_direction():
    rep = run_experiment(ExperimentConfig(synthetic=SyntheticSpec(40, 2, 3, 2.0, 0), direction="forward"))
    assert rep.algorithms == ("sfg", "sfg+")
    assert len(rep.rows) == 20


def test_lda_inducer_runs():
    rep = run_experiment(ExperimentConfig(synthetic=SyntheticSpec(60, 2, 4, 3.0, 0), inducer="lda"))
    assert rep.mean_error("sbg") <= 0.2


def test_summary_formatting():
    rows = [FoldResult(f, f // 2, f % 2, "sbg", 0.158, 4, ("a",) * 4) for f in range(10)]
    rows += [FoldResult(f, f // 2, f % 2, "sbg+", 0.139, 3, ("a",) * 3) for f in range(10)]
    text = ExperimentReport(("sbg", "sbg+"), rows).summary()
    lines = text.splitlines()
    assert lines[1].split() == ["SBG+", "13.9", "3.0"]
    assert lines[2].split() == ["SBG", "15.8", "4.0"]


def test_report_csv_round_trip(report, tmp_path, capsys):
    p = tmp_path / "r.csv"
    write_report(report, p)
    assert "SBG+" in capsys.readouterr().out
    lines = p.read_text().splitlines()
    assert lines[0] == "fold,repetition,orientation,algorithm,test_error,subset_size,subset_members,warning"
    assert lines[21] == "# aggregate"
    back = read_report(p)
    assert back.algorithms == report.algorithms
    pairs = [(a, b) for alg in report.algorithms
             for a, b in zip(report.for_algorithm(alg), back.for_algorithm(alg))]
    assert len(pairs) == 20
    for a, b in pairs:
        assert float(f"{a.test_error:.12g}") == float(f"{b.test_error:.12g}")
        assert (a.fold, a.algorithm, a.subset_size, a.subset_members) == (b.fold, b.algorithm, b.subset_size, b.subset_members)


def test_per_fold_prefilter_never_sees_test_rows():
    data = generate_synthetic(SyntheticSpec(60, 2, 18, 2.0, 5))
    audit = LeakAudit(60, labels=data.labels)
    run_experiment(ExperimentConfig(synthetic=SyntheticSpec(60, 2, 18, 2.0, 5), prefilter_k=6), observer=audit)
    phases = {p for p, _, _ in audit.seen}
    assert {"prefilter", "search", "refit-train", "refit-test"} <= phases
    assert audit.violations() == []
    for phase, fold, ids in audit.seen:
        if phase == "refit-test":
            assert ids == audit.plan[fold][1]


def test_global_prefilter_is_flagged_by_audit():
    data = generate_synthetic(SyntheticSpec(60, 2, 18, 2.0, 5))
    audit = LeakAudit(60, labels=data.labels)
    cfg = ExperimentConfig(synthetic=SyntheticSpec(60, 2, 18, 2.0, 5), prefilter_k=6, global_prefilter=True)
    run_experiment(cfg, observer=audit)
    assert ("prefilter", -1) in audit.violations()


def test_prefilter_k_larger_than_width_rejected():
    with pytest.raises(DataError):
        run_experiment(ExperimentConfig(synthetic=SyntheticSpec(20, 1, 2, 1.0, 0), prefilter_k=10))


def test_config_parsing_and_overrides():
    text = """
    # comment
    n_samples = 50
    n_informative = 2
    n_noise = 4
    class_separation = 2.5
    lambda = 0.5
    inducer = lda
    prefilter_k = 3
    global_prefilter = no
    """
    values = parse_config_text("\n".join(l.strip() for l in text.splitlines()))
    assert values["lam"] == 0.5 and values["prefilter_k"] == 3 and values["global_prefilter"] is False
    cfg = build_config(values, {"lam": 0.25, "inducer": None, "synthetic": {"seed": 9}})
    assert cfg.lam == 0.25
    assert cfg.inducer == "lda"
    assert cfg.synthetic == SyntheticSpec(50, 2, 4, 2.5, 9)


@pytest.mark.parametrize("text", ["bogus = 1", "lambda = 2", "direction = sideways", "global_prefilter = maybe"])
def test_bad_config_rejected(text):
    with pytest.raises(DataError):
        build_config(parse_config_text(text + "\nn_samples = 20\nn_informative = 1\nn_noise = 1"), {})


def test_needs_exactly_one_data_source(tmp_path):
    with pytest.raises(DataError):
        ExperimentConfig().validate()
    with pytest.raises(DataError):
        ExperimentConfig(data=str(tmp_path / "x.csv"), synthetic=SPEC).validate()
