"""CLI subcommands, exit codes, and file formats."""

import numpy as np
import pytest

from tilesampler import Domain, SampleArchive
from tilesampler.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_counts(capsys):
    code, out, _ = run(capsys, "enumerate", "--model", "domino", "--square", "2")
    assert code == 0 and out.strip() == "2"
    code, out, _ = run(capsys, "enumerate", "--model", "sixvertex", "--dwbc", "3")
    assert code == 0 and out.strip() == "7"
    code, out, _ = run(capsys, "enumerate", "--model", "lozenge", "--hexagon", "2,2,2")
    assert code == 0 and out.strip() == "20"


def test_dist_table(capsys):
    code, out, _ = run(
        capsys, "dist", "--model", "domino", "--square", "2",
        "--weights", "q=1", "--format", "csv",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "state,probability"
    probs = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert probs == pytest.approx([0.5, 0.5])


def test_cftp_archive_and_density(tmp_path, capsys):
    arc_path = tmp_path / "samples.txt"
    code, _, _ = run(
        capsys, "cftp", "--model", "domino", "--aztec", "2",
        "--seed", "0x2a", "--samples", "50", "--out", str(arc_path),
    )
    assert code == 0
    with open(arc_path) as fh:
        arc = SampleArchive.load(fh, Domain.aztec(2))
    assert len(arc) == 50
    assert arc.header["seed"] == "0x2a"

    code, out, _ = run(
        capsys, "density", "--model", "domino", "--aztec", "2",
        "--in", str(arc_path), "--observable", "domino-orientation",
    )
    assert code == 0
    rows = [ln.split() for ln in out.strip().splitlines()]
    assert len(rows) == 4 and len(rows[0]) == 4


def test_mcmc_sample_requires_steps(capsys):
    code, _, err = run(capsys, "sample", "--model", "domino", "--square", "2")
    assert code == 2 and "steps" in err


def test_mcmc_sample_runs(tmp_path, capsys):
    arc_path = tmp_path / "mcmc.txt"
    code, _, _ = run(
        capsys, "sample", "--model", "domino", "--square", "2",
        "--steps", "64", "--samples", "10", "--out", str(arc_path),
    )
    assert code == 0
    with open(arc_path) as fh:
        arc = SampleArchive.load(fh, Domain.square(2))
    assert len(arc) == 10 and arc.header["sampler"] == "mcmc steps=64"


def test_untileable_exit_code(tmp_path, capsys):
    path = tmp_path / "odd.txt"
    path.write_text("2\n11\n10\n")
    code, _, err = run(
        capsys, "cftp", "--model", "domino", "--domain", str(path), "--samples", "1"
    )
    assert code == 3 and "tileable" in err


def test_non_monotone_exit_code(capsys):
    code, _, err = run(
        capsys, "cftp", "--model", "sixvertex", "--dwbc", "3",
        "--weights", "a=2,b=1,c=1",
    )
    assert code == 4 and "a <= c" in err


def test_invalid_input_exit_code(capsys):
    code, _, _ = run(capsys, "enumerate", "--model", "domino")
    assert code == 2
    code, _, _ = run(capsys, "cftp", "--model", "lozenge", "--hexagon", "nope")
    assert code == 2


def test_render_svg(tmp_path, capsys):
    out_path = tmp_path / "pic.svg"
    code, _, _ = run(
        capsys, "render", "--model", "lozenge", "--hexagon", "1,1,1",
        "--seed", "7", "--out", str(out_path), "--format", "svg",
    )
    assert code == 0
    body = out_path.read_text()
    assert body.startswith("<svg") and "<polygon" in body


def test_render_from_state_file(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.txt"
    code, out, _ = run(capsys, "cftp", "--model", "sixvertex", "--dwbc", "2", "--seed", "5")
    record = [ln for ln in out.splitlines() if not ln.startswith("#")][0]
    n = 2
    h = record[: n * (n + 1)]
    v = record[n * (n + 1):]
    rows = [str(n)] + [h[i: i + n + 1] for i in range(0, len(h), n + 1)] + \
        [v[i: i + n] for i in range(0, len(v), n)]
    cfg_path.write_text("\n".join(rows) + "\n")
    code, out, _ = run(
        capsys, "render", "--model", "sixvertex", "--dwbc", "2", "--in", str(cfg_path)
    )
    assert code == 0 and out.startswith("<svg")


def test_hist_from_archive(tmp_path, capsys):
    arc_path = tmp_path / "sv.txt"
    code, _, _ = run(
        capsys, "cftp", "--model", "sixvertex", "--dwbc", "3",
        "--samples", "200", "--out", str(arc_path),
    )
    assert code == 0
    code, out, _ = run(
        capsys, "hist", "--model", "sixvertex", "--dwbc", "3",
        "--in", str(arc_path), "--observable", "c-vertex-count",
    )
    assert code == 0
    assert out.splitlines()[0] == "left,right,density"


def test_threads_backend(capsys):
    code, out, _ = run(
        capsys, "cftp", "--model", "domino", "--square", "4", "--samples", "3",
        "--backend", "threads", "--threads", "2",
    )
    assert code == 0
    code2, out2, _ = run(
        capsys, "cftp", "--model", "domino", "--square", "4", "--samples", "3",
    )
    records = lambda s: [ln for ln in s.splitlines() if not ln.startswith("#")]
    assert records(out) == records(out2)


def test_threads_env_default(capsys, monkeypatch):
    monkeypatch.setenv("TILESAMPLER_THREADS", "2")
    code, out, _ = run(
        capsys, "cftp", "--model", "domino", "--square", "2", "--samples", "2",
        "--backend", "threads",
    )
    assert code == 0 and "backend: threads" in out


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("ok") >= 7
