import csv
import json

import pytest

from cmgroups.asymptotics import CSV_COLUMNS
from cmgroups.cache import cache_path, read_cache
from cmgroups.cli import main
from cmgroups.presets import get_preset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_presets_listing(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == 0
    assert "cm-163" in out and "Cremona" in out


def test_compute_is_incremental_and_idempotent(tmp_path, capsys):
    args = ["--cache-dir", str(tmp_path)]
    assert run(capsys, "compute", "--xmax", "5000", *args)[1].strip().endswith("(668 new)")
    path = cache_path(tmp_path, get_preset("cm-4"))
    first = path.read_bytes()
    mtime = path.stat().st_mtime_ns
    assert "(0 new)" in run(capsys, "compute", "--xmax", "5000", *args)[1]
    assert path.stat().st_mtime_ns == mtime
    out = run(capsys, "compute", "--xmax", "8000", *args)[1]
    assert "(338 new)" in out
    grown = read_cache(path, get_preset("cm-4"))
    assert grown.x_max == 8000
    assert grown.rows[:668].tobytes() == first[first.find(b"\n\n") + 2 :]


def test_incremental_equals_one_shot(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "compute", "--xmax", "3000", "--cache-dir", str(a))
    run(capsys, "compute", "--xmax", "7000", "--cache-dir", str(a))
    run(capsys, "compute", "--xmax", "7000", "--cache-dir", str(b), "--segment", "1000")
    c = get_preset("cm-4")
    assert cache_path(a, c).read_bytes() == cache_path(b, c).read_bytes()


def test_mismatched_cache_refused(tmp_path, capsys):
    run(capsys, "compute", "--xmax", "500", "--cache-dir", str(tmp_path))
    path = cache_path(tmp_path, get_preset("cm-4"))
    path.write_bytes(path.read_bytes().replace(b"d_K: -4", b"d_K: -3"))
    code, _, err = run(capsys, "compute", "--xmax", "900", "--cache-dir", str(tmp_path))
    assert code == 2 and "d_K" in err


def test_report_requires_coverage(tmp_path, capsys):
    run(capsys, "compute", "--xmax", "2000", "--cache-dir", str(tmp_path))
    code, _, err = run(capsys, "report", "--xmax", "20000", "--cache-dir", str(tmp_path), "--out", str(tmp_path / "r"))
    assert code == 2 and "20000" in err


def test_report_outputs(tmp_path, capsys):
    cd, out = str(tmp_path / "c"), tmp_path / "r"
    run(capsys, "compute", "--xmax", "20000", "--cache-dir", cd)
    code, text, _ = run(capsys, "report", "--xmax", "20000", "--checkpoints", "1000,10000,20000", "--cache-dir", cd, "--out", str(out))
    assert "R(x) in (0,1)" in text
    assert code in (0, 1)
    rows = list(csv.reader((out / "report.csv").open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [r[0] for r in rows[1:]] == ["1000", "10000", "20000"]
    payload = json.loads((out / "report.json").read_text())
    assert payload["curve"]["label"] == "cm-4"
    assert {"c_E", "verdicts", "rows", "nk_estimates"} <= payload.keys()
    assert code == (0 if all(v["passed"] for v in payload["verdicts"]) else 1)
    first = (out / "report.json").read_bytes()
    run(capsys, "report", "--xmax", "20000", "--checkpoints", "1000,10000,20000", "--cache-dir", cd, "--out", str(out))
    assert (out / "report.json").read_bytes() == first


def test_report_fails_on_corrupt_record(tmp_path, capsys):
    run(capsys, "compute", "--xmax", "3000", "--cache-dir", str(tmp_path))
    c = get_preset("cm-4")
    path = cache_path(tmp_path, c)
    cache = read_cache(path, c)
    cache.rows["e_p"][10] += 1
    cache.write(path)
    code, _, err = run(capsys, "report", "--xmax", "3000", "--cache-dir", str(tmp_path), "--out", str(tmp_path / "r"))
    assert code == 1 and f"p={int(cache.rows['p'][10])}" in err
    code, out, _ = run(capsys, "verify", "--xmax", "3000", "--cache-dir", str(tmp_path))
    assert code == 1 and "MISMATCH" in out


def test_verify_clean_cache(tmp_path, capsys):
    run(capsys, "compute", "--xmax", "4000", "--curve", "cm-7", "--cache-dir", str(tmp_path))
    code, out, _ = run(capsys, "verify", "--xmax", "4000", "--curve", "cm-7", "--cache-dir", str(tmp_path), "--dual-oracle-k", "2,3,4,5,7")
    assert code == 0
    assert out.count(" ok") == 4


def test_adhoc_curve(tmp_path, capsys):
    # y^2 = x^3 - 4x is a quadratic twist of the cm-4 preset
    args = ["--a4", "-4", "--a6", "0", "--conductor", "64", "--disc", "-4", "--label", "twist4", "--cache-dir", str(tmp_path)]
    assert run(capsys, "compute", "--xmax", "1000", *args)[0] == 0
    assert len(list(tmp_path.glob("twist4-*.rec"))) == 1
    with pytest.raises(SystemExit):
        main(["compute", "--a4", "-4", "--cache-dir", str(tmp_path)])


def test_unknown_preset(tmp_path):
    with pytest.raises(SystemExit):
        main(["compute", "--curve", "cm-5", "--cache-dir", str(tmp_path)])


def test_default_report_has_three_rows(tmp_path, capsys):
    cd, out = str(tmp_path / "c"), tmp_path / "r"
    assert run(capsys, "compute", "--cache-dir", cd)[0] == 0
    run(capsys, "report", "--cache-dir", cd, "--out", str(out))
    rows = list(csv.reader((out / "report.csv").open()))
    assert [r[0] for r in rows[1:]] == ["1000", "10000", "100000"]
