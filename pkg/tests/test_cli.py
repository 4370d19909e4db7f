import csv
import subprocess
import sys

import pytest

from rowsu.cli import main


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "synth.csv"
    args = ["synth", "--n-neg", "80", "--n-pos", "20", "--p", "500", "--informative", "20",
            "--shift", "3", "--seed", "1", "--out", str(out)]
    assert main(args) == 0
    return out


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_synth_shape(synth_file):
    rows = read_rows(synth_file)
    assert len(rows) == 101
    assert all(len(r) == 501 for r in rows)


def test_planted_file(synth_file):
    planted = (synth_file.parent / "synth_planted.txt").read_text().split()
    header = read_rows(synth_file)[0]
    assert len(planted) == 20 and set(planted) <= set(header)


def test_select_writes_p_star_rows(synth_file, tmp_path):
    out = tmp_path / "ranks.csv"
    assert main(["select", "--input", str(synth_file), "--method", "rowsu",
                 "--p-star", "20", "--seed", "7", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["rank", "gene_name", "score"]
    assert len(rows) == 21
    assert [r[0] for r in rows[1:]] == [str(k) for k in range(1, 21)]


@pytest.mark.parametrize("method", ["fish", "wilc", "snr", "pos", "mrmr"])
def test_select_baselines(synth_file, tmp_path, method):
    out = tmp_path / f"{method}.csv"
    assert main(["select", "--input", str(synth_file), "--method", method,
                 "--p-star", "5", "--out", str(out)]) == 0
    assert len(read_rows(out)) == 6


def test_select_is_byte_identical(synth_file, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        main(["select", "--input", str(synth_file), "--p-star", "10", "--seed", "3",
              "--train-fraction", "0.8", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_unknown_method_exits_2(synth_file, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rowsu", "select", "--input", str(synth_file),
         "--method", "bogus", "--out", str(tmp_path / "x.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "bogus" in proc.stderr


def test_evaluate_emits_three_files(synth_file, tmp_path):
    out_dir = tmp_path / "res"
    assert main(["evaluate", "--input", str(synth_file), "--repeats", "2", "--p-grid", "5,10",
                 "--methods", "rowsu,snr,fish", "--classifiers", "knn,rf", "--trees", "10",
                 "--seed", "7", "--out-dir", str(out_dir)]) == 0
    assert sorted(p.name for p in out_dir.iterdir()) == ["aggregate.csv", "raw.csv", "stability.csv"]
    assert len(read_rows(out_dir / "aggregate.csv")) == 1 + 3 * 2 * 2
    assert len(read_rows(out_dir / "raw.csv")) == 1 + 2 * 3 * 2 * 2


def test_evaluate_bad_p_grid(synth_file, tmp_path, capsys):
    code = main(["evaluate", "--input", str(synth_file), "--repeats", "1", "--p-grid", "5,1000",
                 "--out-dir", str(tmp_path / "r")])
    assert code == 1
    assert "1000" in capsys.readouterr().err


def test_missing_input_is_error(tmp_path, capsys):
    code = main(["select", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o.csv")])
    assert code == 1
    assert "none.csv" in capsys.readouterr().err


def test_bad_methods_list_exits_2(synth_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--input", str(synth_file), "--methods", "rowsu,nope", "--out-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_null_shift_recovery_near_chance(tmp_path):
    data = tmp_path / "null.csv"
    main(["synth", "--n-neg", "80", "--n-pos", "20", "--p", "200", "--informative", "10",
          "--shift", "0", "--seed", "2", "--out", str(data)])
    ranks = tmp_path / "r.csv"
    main(["select", "--input", str(data), "--p-star", "10", "--out", str(ranks)])
    planted = set((tmp_path / "null_planted.txt").read_text().split())
    chosen = {r[1] for r in read_rows(ranks)[1:]}
    # chance is 10 * 10 / 200 = 0.5 hits
    assert len(chosen & planted) <= 3
