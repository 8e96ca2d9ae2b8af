import math
import shutil
import subprocess

import pytest

from plots import RATIO_VS_M_BY_D, RATIO_VS_M_BY_P, ZENO_TRAJ, FigureSpec, render


def roles(series):
    counts = {}
    for entry in series:
        counts[entry["role"]] = counts.get(entry["role"], 0) + 1
    return counts


def test_default_sweep_panel_series(default_sweep_csv, tmp_path):
    out = tmp_path / "panel_a.svg"
    series = render(FigureSpec(str(default_sweep_csv), RATIO_VS_M_BY_P, str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert roles(series) == {"points": 4, "curve": 4, "reference": 1}
    keys = sorted(entry["key"] for entry in series if entry["role"] == "curve")
    assert keys == [1e-4, 1e-3, 1e-2, 1e-1]
    for entry in series:
        if entry["role"] == "curve":
            assert entry["x"] == sorted(entry["x"])
            assert len(entry["x"]) == 14


def test_reference_line_is_the_e_over_m_valley(default_sweep_csv, tmp_path):
    series = render(
        FigureSpec(str(default_sweep_csv), RATIO_VS_M_BY_P, str(tmp_path / "ref.svg"))
    )
    (ref,) = [entry for entry in series if entry["role"] == "reference"]
    for i in (0, len(ref["x"]) // 2, -1):
        assert abs(math.log(ref["y"][i]) - (1.0 - math.log(ref["x"][i]))) < 1e-12
    # the line crosses ratio 1 at M = e
    logx = [math.log(x) for x in ref["x"]]
    logy = [math.log(y) for y in ref["y"]]
    j = next(k for k, v in enumerate(logx) if v >= 1.0)
    t = (1.0 - logx[j - 1]) / (logx[j] - logx[j - 1])
    assert abs(logy[j - 1] + t * (logy[j] - logy[j - 1])) < 1e-12


def test_by_d_panel_has_no_reference_line(by_d_sweep_csv, tmp_path):
    out = tmp_path / "panel_b.svg"
    series = render(FigureSpec(str(by_d_sweep_csv), RATIO_VS_M_BY_D, str(out)))
    assert roles(series) == {"points": 2, "curve": 1}
    point_keys = sorted(entry["key"] for entry in series if entry["role"] == "points")
    assert point_keys == [2.0, 4.0]
    (curve,) = [entry for entry in series if entry["role"] == "curve"]
    assert math.isinf(curve["key"])
    assert curve["label"] == "d=inf"


def test_zeno_trajectory_panel(zeno_csv, tmp_path):
    out = tmp_path / "traj.svg"
    series = render(FigureSpec(str(zeno_csv), ZENO_TRAJ, str(out)))
    assert [entry["label"] for entry in series] == ["fidelity", "cumulative accept"]
    for entry in series:
        assert entry["x"][0] == 0.0 and len(entry["x"]) == 21
        assert entry["y"][0] == 1.0
    fidelity = series[0]["y"]
    assert all(0.0 <= value <= 1.0 for value in fidelity)


def test_header_only_csv_gives_empty_axes(header_only_csv, tmp_path):
    out = tmp_path / "empty.svg"
    series = render(FigureSpec(str(header_only_csv), RATIO_VS_M_BY_P, str(out)))
    assert series == []
    assert out.exists() and out.stat().st_size > 0
    script = shutil.which("qpurify-plot")
    proc = subprocess.run(
        [script, str(header_only_csv), RATIO_VS_M_BY_P, str(tmp_path / "empty_cli.svg")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr


def test_rerender_is_byte_identical(by_d_sweep_csv, tmp_path):
    first = tmp_path / "one.svg"
    second = tmp_path / "two.svg"
    render(FigureSpec(str(by_d_sweep_csv), RATIO_VS_M_BY_D, str(first)))
    render(FigureSpec(str(by_d_sweep_csv), RATIO_VS_M_BY_D, str(second)))
    assert first.read_bytes() == second.read_bytes()


def test_missing_columns_are_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("gadget,p,d\nCGG,0.1,2\n")
    with pytest.raises(ValueError, match="missing columns: M, ratio"):
        render(FigureSpec(str(bad), RATIO_VS_M_BY_P, str(tmp_path / "x.svg")))


def test_empty_file_names_all_columns(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="missing columns: step, fidelity"):
        render(FigureSpec(str(empty), ZENO_TRAJ, str(tmp_path / "x.svg")))


def test_log_axes_reject_nonpositive_data(tmp_path):
    bad = tmp_path / "zero.csv"
    bad.write_text("gadget,p,d,M,ptilde,ratio,accept_prob,source\nCGG,0.1,2,2,0,0,0.9,ANALYTIC\n")
    with pytest.raises(ValueError, match="strictly positive"):
        render(FigureSpec(str(bad), RATIO_VS_M_BY_P, str(tmp_path / "x.svg")))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec("whatever.csv", "PIE", str(tmp_path / "x.svg"))


def test_script_renders_and_exits_zero(default_sweep_csv, tmp_path):
    script = shutil.which("qpurify-plot")
    assert script is not None
    out = tmp_path / "cli.svg"
    proc = subprocess.run(
        [script, str(default_sweep_csv), RATIO_VS_M_BY_P, str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().lstrip().startswith("<?xml")


def test_script_rejects_unknown_kind(default_sweep_csv, tmp_path):
    script = shutil.which("qpurify-plot")
    proc = subprocess.run(
        [script, str(default_sweep_csv), "PIE", str(tmp_path / "x.svg")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


def test_script_reports_missing_columns(tmp_path):
    script = shutil.which("qpurify-plot")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    proc = subprocess.run(
        [script, str(bad), ZENO_TRAJ, str(tmp_path / "x.svg")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert "missing columns" in proc.stderr
