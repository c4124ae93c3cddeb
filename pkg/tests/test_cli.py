import pytest

from extharper.cli import main


def read(path):
    with open(path, encoding="utf-8") as fp:
        return fp.read()


def test_fidelity_map_roundtrip(tmp_path):
    out = tmp_path / "fid.csv"
    rc = main(
        [
            "fidelity-map",
            "--ref", "1.0,0.5",
            "--m", "9",
            "--grid", "4x3",
            "--range", "0.5,1.5,0.3,0.8",
            "--out", str(out),
        ]
    )
    assert rc == 0
    lines = read(out).strip().split("\n")
    assert lines[0].startswith("lambda,mu,fidelity,")
    assert len(lines) == 1 + 4 * 3


def test_fidelity_map_deterministic(tmp_path):
    args = [
        "fidelity-map",
        "--ref", "1.0,0.5",
        "--m", "9",
        "--grid", "3x3",
        "--range", "0.5,1.5,0.3,0.8",
    ]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert read(out1) == read(out2)


def test_fs_map_and_direction_normalization(tmp_path):
    out = tmp_path / "fs.csv"
    rc = main(
        [
            "fs-map",
            "--dir", "1,-2",
            "--m", "9",
            "--grid", "3x2",
            "--range", "0.5,1.5,0.3,0.8",
            "--out", str(out),
        ]
    )
    assert rc == 0
    header = read(out).split("\n")[0]
    assert "chi_f" in header and "chi_f_reliable" in header


def test_gap_and_entropy_maps(tmp_path):
    for cmd in ("gap-map", "entropy-map"):
        out = tmp_path / f"{cmd}.csv"
        rc = main(
            [cmd, "--m", "9", "--grid", "3x2", "--range", "0.5,1.5,0.3,0.8", "--out", str(out)]
        )
        assert rc == 0
        header = read(out).split("\n")[0]
        assert header.startswith("lambda,mu,gap,")
        assert "ground_ipr_sum_z2" in header


def test_boundary_subcommand(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = main(
        [
            "boundary",
            "--fix", "mu=0",
            "--window", "1.5,2.5",
            "--step", "0.01",
            "--m", "10",
            "--threads", "2",
            "--out", str(out),
        ]
    )
    assert rc == 0
    printed = capsys.readouterr().out
    assert "boundary lambda =" in printed
    value = float(printed.strip().rsplit(" ", 1)[1])
    assert abs(value - 2.0) <= 0.05
    lines = read(out).strip().split("\n")
    assert lines[0] == "lambda,spectrum_entropy,d_entropy_dq"
    assert len(lines) == 102


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "scan.cfg"
    cfg.write_text(
        "# sweep settings\n"
        "fix = mu=0\n"
        "window = 1.5,2.5\n"
        "step = 0.05\n"
        "m = 9\n",
        encoding="utf-8",
    )
    rc = main(["boundary", "--config", str(cfg), "--m", "10"])
    assert rc == 0
    assert "boundary lambda =" in capsys.readouterr().out


def test_config_rejects_garbage(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("not a key value line\n", encoding="utf-8")
    rc = main(["boundary", "--config", str(cfg)])
    assert rc == 1


def test_missing_required_option_errors(capsys):
    assert main(["fidelity-map", "--m", "9"]) == 1
    assert "error" in capsys.readouterr().err


def test_boundary_not_found_is_a_clean_error(capsys):
    rc = main(["boundary", "--fix", "mu=0", "--window", "0.5,1.0", "--m", "10"])
    assert rc == 1
    assert "no clear entropy drop" in capsys.readouterr().err


def test_fs_scaling_smoke(tmp_path, capsys):
    out = tmp_path / "scaling.csv"
    rc = main(
        [
            "fs-scaling",
            "--transition", "mit-i-ii",
            "--sizes", "9,10,11",
            "--resolution", "1e-4",
            "--out", str(out),
        ]
    )
    assert rc == 0
    lines = read(out).strip().split("\n")
    assert lines[0] == (
        "group,N,q_max,chi_max,alpha,beta,nu,alpha_over_nu,r2_alpha,r2_beta,collapse_residual"
    )
    assert len(lines) == 4
    assert "alpha/nu=" in capsys.readouterr().out


def test_verify_subcommand_subsetless(tmp_path):
    out = tmp_path / "verify.csv"
    rc = main(["verify", "--seed", "3", "--out", str(out)])
    assert rc == 0
    lines = read(out).strip().split("\n")
    assert lines[0] == "check,status,measured,tolerance,detail"
    assert len(lines) == 15
