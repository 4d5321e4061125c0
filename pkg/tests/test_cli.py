import csv

import pytest

from accumsel import SyntheticSpec, generate_synthetic, load_csv, write_csv
from accumsel.cli import main


@pytest.fixture
def data_csv(tmp_path):
    p = tmp_path / "d.csv"
    write_csv(generate_synthetic(SyntheticSpec(40, 2, 4, 2.0, 0)), p)
    return p


def open_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def write_table(path, rows):
    path.write_text("".join(f"{b},{s}\n" for b, s in rows))
    return path


def test_lambda_zero_trace_matches_plain(tmp_path, data_csv):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["select", "--data", str(data_csv), "--algo", "sbg", "--trace", str(a)]) == 0
    assert main(["select", "--data", str(data_csv), "--algo", "sbg+", "--lambda", "0", "--trace", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_select_prints_summary(data_csv, capsys):
    assert main(["select", "--data", str(data_csv), "--inducer", "lda"]) == 0
    out = capsys.readouterr().out
    assert "best subset" in out and "scorer calls: 21" in out


def test_lambda_out_of_range(data_csv, capsys):
    assert main(["select", "--data", str(data_csv), "--lambda", "1.5"]) == 2
    assert "[0, 1]" in capsys.readouterr().err


def test_twelve_features_give_78_trace_rows(tmp_path):
    data = tmp_path / "d.csv"
    write_csv(generate_synthetic(SyntheticSpec(24, 2, 10, 2.0, 1)), data)
    trace = tmp_path / "t.csv"
    assert main(["select", "--data", str(data), "--trace", str(trace)]) == 0
    rows = list(csv.reader(trace.read_text().splitlines()))
    assert rows[0] == ["step", "candidate_feature", "mask_bitstring", "score", "chosen_flag"]
    assert len(rows) - 1 == 78


def test_oracle_on_truth_table(tmp_path, capsys):
    p = write_table(tmp_path / "t.csv", [("00", 0.0), ("10", 0.8), ("01", 0.2), ("11", 1.0)])
    assert main(["oracle", "--table", str(p)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == ["feature", "L+", "L-", "R", "R_w"]
    f0, f1 = (l.split("\t") for l in lines[1:])
    assert (f0[0], float(f0[3])) == ("f0", 0.8)
    assert (f1[0], float(f1[3])) == ("f1", 0.2)


def test_oracle_constant_table(tmp_path, capsys):
    p = write_table(tmp_path / "t.csv", [(f"{b:03b}", 0.5) for b in range(8)])
    assert main(["oracle", "--table", str(p)]) == 0
    for line in capsys.readouterr().out.splitlines()[1:]:
        assert float(line.split("\t")[3]) == 0.0


def test_oracle_missing_subset(tmp_path, capsys):
    p = write_table(tmp_path / "t.csv", [("00", 0.0), ("10", 0.8), ("11", 1.0)])
    assert main(["oracle", "--table", str(p)]) == 2
    assert "missing subset 01" in capsys.readouterr().err


def test_oracle_guard(tmp_path, capsys, data_csv):
    assert main(["oracle", "--data", str(data_csv), "--n-guard", "3"]) == 2
    assert "n-guard" in capsys.readouterr().err


def test_oracle_on_data(tmp_path, capsys):
    p = tmp_path / "d.csv"
    write_csv(generate_synthetic(SyntheticSpec(20, 1, 2, 4.0, 0)), p)
    assert main(["oracle", "--data", str(p)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split("\t")[0] for l in lines[1:]] == ["inf0", "noise0", "noise1"]


def test_unknown_flag_and_missing_file(tmp_path):
    assert main(["select", "--bogus"]) == 2
    assert main(["select", "--data", str(tmp_path / "nope.csv")]) == 1


def test_bad_csv_is_usage_error(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1,2,A\n3,x,B\n")
    assert main(["select", "--data", str(p)]) == 2
    assert "row 2, column 2" in capsys.readouterr().err


def test_synth_and_prefilter(tmp_path):
    data = tmp_path / "s.csv"
    assert main(["synth", "--n-samples", "30", "--n-informative", "2", "--n-noise", "6", "--out", str(data)]) == 0
    assert load_csv(data).n_features == 8
    out = tmp_path / "r.csv"
    assert main(["prefilter", "--data", str(data), "--k", "3", "--out", str(out)]) == 0
    reduced = load_csv(out)
    assert reduced.n_features == 3
    mapping = list(csv.reader(open_lines(f"{out}.map.csv")))
    assert mapping[0] == ["new_index", "original_name"]
    assert [m[1] for m in mapping[1:]] == list(reduced.feature_names)
    assert main(["prefilter", "--data", str(data), "--k", "9", "--out", str(out)]) == 2


def test_experiment_with_config_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("n_samples = 40\nn_informative = 2\nn_noise = 3\nclass_separation = 3.0\nlambda = 0.9\n")
    out = tmp_path / "rep.csv"
    assert main(["experiment", "--config", str(cfg), "--lambda", "0", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "SBG+" in text and "SBG" in text
    rows = list(csv.reader(out.read_text().splitlines()))
    body = rows[1:21]
    plain = {r[0]: r[4:7] for r in body if r[3] == "sbg"}
    plus = {r[0]: r[4:7] for r in body if r[3] == "sbg+"}
    assert plain == plus  # lambda 0 on the command line won over the file's 0.9


def test_experiment_from_flags(tmp_path):
    out = tmp_path / "rep.csv"
    args = ["experiment", "--n-samples", "30", "--n-informative", "1", "--n-noise", "3",
            "--direction", "forward", "--threads", "2", "--out", str(out)]
    assert main(args) == 0
    assert sum(1 for r in csv.reader(out.read_text().splitlines()) if r and r[3:4] == ["sfg+"]) == 10


def test_experiment_without_data_source(tmp_path):
    assert main(["experiment", "--out", str(tmp_path / "r.csv")]) == 2
