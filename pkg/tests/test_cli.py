import csv
import io
import subprocess
import sys

import pytest

from fareychain import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_sweep_row(capsys):
    code, out, _ = run(capsys, "sweep", "--kmax", "2", "--betas", "1")
    assert code == 0
    table = rows(out)
    assert table[0] == ["k", "beta", "Z", "F", "U", "msq"]
    assert table[1] == ["2", "1", "1.66666666667", "-0.255412811883", "0.427666611902", "0.6"]


def test_sweep_schedule(capsys):
    code, out, _ = run(capsys, "sweep", "--kmax", "10", "--kstep", "4", "--betas", "1", "2")
    assert code == 0
    assert [r[0] for r in rows(out)[1:]] == ["4", "4", "8", "8", "10", "10"]


def test_interactions(capsys):
    code, out, err = run(capsys, "interactions", "--k", "2")
    assert code == 0
    table = rows(out)
    assert table[0] == ["t_bits", "t_index", "weight", "J"]
    assert float(table[1][3]) == pytest.approx(-0.895879734614, abs=1e-12)
    assert float(table[4][3]) == pytest.approx(0.202732554054, abs=1e-12)
    assert "min J(t)" in err


def test_interactions_constrained_needs_n(capsys):
    code, _, err = run(capsys, "interactions", "--k", "3", "--ensemble", "constrained")
    assert code == 2 and "--n" in err


def test_cluster(capsys):
    code, out, _ = run(capsys, "cluster", "--k", "2", "--t", "3", "--order", "30")
    assert code == 0
    last = rows(out)[-1]
    assert last[0] == "30" and float(last[4]) < 1e-9


def test_cluster_bad_t(capsys):
    code, _, err = run(capsys, "cluster", "--k", "2", "--t", "4")
    assert code == 2 and "--t" in err


def test_correlate(capsys):
    code, out, err = run(capsys, "correlate", "--k", "2", "--beta", "1")
    assert code == 0
    assert rows(out)[1:] == [["1", "1"], ["2", "0.2"]]
    assert "<m^2>=0.6" in err


def test_gks(capsys):
    code, out, err = run(capsys, "gks", "--k", "2", "--n", "1", "--beta", "1", "--max-size", "2")
    assert code == 0
    table = {r[0]: float(r[2]) for r in rows(out)[1:]}
    assert table["1 2"] == pytest.approx(1 / 7, rel=1e-11)
    assert table[""] == 1.0


def test_events(capsys):
    code, out, err = run(capsys, "events", "--g", "10", "--beta", "1")
    assert code == 0
    assert len(rows(out)) == 1 + 7
    assert "smallest nmax" in err


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "matrices")
    assert code == 0 and out.startswith("PASS")


def test_verify_failure_exit_code(capsys, monkeypatch):
    from fareychain import verify

    monkeypatch.setitem(verify.SUITES, "matrices", lambda: (False, "forced"))
    code, out, _ = run(capsys, "verify", "--suite", "matrices")
    assert code == 1 and "FAIL" in out


def test_events_failure_exit_code(capsys, monkeypatch):
    from fareychain import thermo

    fake = thermo.EventReport(6, 1.0, 0.6, (0.6,))
    monkeypatch.setattr(thermo, "event_probability_sum", lambda *a: fake)
    code, _, _ = run(capsys, "events", "--g", "6", "--beta", "1", "--nmax", "1")
    assert code == 1


@pytest.mark.parametrize("argv, flag", [
    (["interactions", "--k", "99"], "--k"),
    (["sweep", "--kmax", "99"], "--kmax"),
    (["sweep", "--kmax", "4", "--betas", "0"], "--betas"),
    (["events", "--g", "8", "--beta", "1", "--nmax", "6"], "--nmax"),
    (["--threads", "0", "verify"], "--threads"),
])
def test_usage_errors(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 2 and flag in err


def test_parse_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--kmax", "four"])
    assert exc.value.code == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "j.csv"
    assert cli.main(["interactions", "--k", "3", "-o", str(target)]) == 0
    assert len(target.read_text().splitlines()) == 9


def test_sweep_identical_across_thread_counts(tmp_path):
    outputs = []
    for n in (1, 4, 8):
        target = tmp_path / f"sweep{n}.csv"
        subprocess.run(
            [sys.executable, "-m", "fareychain", "--threads", str(n), "sweep", "--ks", "17", "18",
             "--betas", "0.5", "3", "-o", str(target)],
            check=True,
        )
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
