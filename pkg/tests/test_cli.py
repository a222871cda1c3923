"""Command-line front end: schema, artifacts, restart, compare, sweep."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ttchain.archive import load_run, records_from_ndjson
from ttchain.chain import ChainSpec
from ttchain.cli import main
from ttchain.models import ExcitonModel

EXCITON_TISE = """
model:
  kind: exciton
  n_site: 5
  alpha: 0.1
  beta: -0.01
dynamics:
  kind: tise
  n_levels: 2
  ranks: 6
  conv_eps: 1.0e-9
  seed: 7
"""

EXCITON_TDSE = """
model:
  kind: exciton
  n_site: 5
  n_basis: 2
  alpha: 0.1
  beta: -0.01
  eta: -0.1
dynamics:
  kind: tdse
  scheme: s2
  t_step: 10.0
  n_step: 6
  sub_steps: 5
  threshold: 1.0e-12
  initial:
    kind: fundamental
    site: 2
"""

PHONON_CEOM = """
model:
  kind: phonon
  n_site: 4
  mass: 1.0
  nu: 1.0e-3
  omg: 1.4142135623730951e-3
dynamics:
  kind: ceom
  solver: qe
  t_step: 50.0
  n_step: {n_step}
  initial:
    kind: coherent
    displace:
      2: 3.0
io:
  archive: {archive}
"""

COUPLED_QCMD = """
model:
  kind: coupled
  n_site: 6
  alpha: 0.1
  beta: -0.01
  mass: 1.0
  nu: 1.0e-3
  omg: 1.4142135623730951e-3
  sig: 1.6e-4
dynamics:
  kind: qcmd
  scheme: sm
  t_step: 5.0
  n_step: {n_step}
  sub_steps: 2
  initial:
    kind: packet
    shape: sech
    center: 2
    width: 1.0
io:
  archive: {archive}
"""


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(*argv):
    return main(list(argv))


class TestSchema:
    def check_rejected(self, tmp_path, capsys, text, fragment):
        code = run_cli("run", write(tmp_path, text))
        assert code == 2
        assert fragment in capsys.readouterr().err

    def test_missing_n_site_names_the_key(self, tmp_path, capsys):
        text = EXCITON_TISE.replace("  n_site: 5\n", "")
        self.check_rejected(tmp_path, capsys, text, "n_site")

    def test_unknown_model_key(self, tmp_path, capsys):
        text = EXCITON_TISE.replace("alpha: 0.1", "alpha: 0.1\n  omg: 1.0")
        self.check_rejected(tmp_path, capsys, text, "'omg'")

    def test_unknown_dynamics_key(self, tmp_path, capsys):
        text = EXCITON_TDSE.replace("scheme: s2", "scheme: s2\n  ranks: 5")
        self.check_rejected(tmp_path, capsys, text, "'ranks'")

    def test_unknown_io_key(self, tmp_path, capsys):
        self.check_rejected(tmp_path, capsys,
                            EXCITON_TISE + "io:\n  colour: red\n", "'colour'")

    def test_unknown_section(self, tmp_path, capsys):
        self.check_rejected(tmp_path, capsys,
                            EXCITON_TISE + "plotting:\n  dpi: 300\n",
                            "'plotting'")

    def test_invalid_yaml(self, tmp_path, capsys):
        self.check_rejected(tmp_path, capsys, "model: [unclosed", "YAML")

    def test_unknown_dynamics_kind(self, tmp_path, capsys):
        text = EXCITON_TISE.replace("kind: tise", "kind: diffusion")
        self.check_rejected(tmp_path, capsys, text, "dynamics.kind")

    def test_unknown_scheme(self, tmp_path, capsys):
        text = EXCITON_TDSE.replace("scheme: s2", "scheme: s3")
        self.check_rejected(tmp_path, capsys, text, "s3")

    def test_missing_initial(self, tmp_path, capsys):
        text = EXCITON_TDSE.split("  initial:")[0]
        self.check_rejected(tmp_path, capsys, text, "initial")

    def test_ceom_needs_phonon(self, tmp_path, capsys):
        text = EXCITON_TISE.split("dynamics:")[0] + (
            "dynamics:\n  kind: ceom\n  t_step: 1.0\n  n_step: 1\n"
            "  initial:\n    kind: coherent\n    displace: 1.0\n")
        self.check_rejected(tmp_path, capsys, text, "phonon")

    def test_qcmd_needs_coupled(self, tmp_path, capsys):
        text = PHONON_CEOM.format(n_step=1, archive="x.wtra").replace(
            "kind: ceom\n  solver: qe", "kind: qcmd")
        self.check_rejected(tmp_path, capsys, text, "coupled")

    def test_coherent_needs_phonon(self, tmp_path, capsys):
        text = EXCITON_TDSE.replace(
            "    kind: fundamental\n    site: 2",
            "    kind: coherent\n    displace: 1.0")
        self.check_rejected(tmp_path, capsys, text, "coherent")

    def test_displace_length_mismatch(self, tmp_path, capsys):
        text = PHONON_CEOM.format(n_step=1, archive="x.wtra").replace(
            "    displace:\n      2: 3.0", "    displace: [1.0, 2.0]")
        self.check_rejected(tmp_path, capsys, text, "4 entries")

    def test_missing_config_file(self, tmp_path, capsys):
        assert run_cli("run", str(tmp_path / "absent.yaml")) == 4


class TestRunArtifacts:
    def test_tise_levels_and_files(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = run_cli("run", write(tmp_path, EXCITON_TISE),
                       "--output-dir", str(out))
        assert code == 0
        stdout = capsys.readouterr().out
        assert "level 0" in stdout and "level 1" in stdout
        run = load_run(out / "run.wtra")
        assert run.kind == "tise"
        assert len(run.records) == 2
        assert len(run.checkpoints) == 2
        assert run.checkpoints[0][:4] == b"WTTC"
        model = ExcitonModel(ChainSpec(5), 0.1, -0.01, 0.0)
        exact = model.exact_levels(2)
        got = sorted(r.energy for r in run.records)
        assert_allclose(got, exact[:2], atol=1e-8)
        text = (out / "records.ndjson").read_text()
        assert len(records_from_ndjson(text)) == 2

    def test_tdse_records_and_checkpoint(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("run", write(tmp_path, EXCITON_TDSE),
                       "--output-dir", str(out)) == 0
        run = load_run(out / "run.wtra")
        assert len(run.records) == 7
        assert run.checkpoints[0][:4] == b"WTTC"
        for rec in run.records:
            # the leapfrog norm oscillates at the local-error scale
            assert abs(rec.norm - 1.0) < 1e-5
            assert abs(rec.acf) <= 1.0 + 1e-5
            assert_allclose(np.sum(rec.populations), 1.0, atol=1e-5)

    def test_sample_every_thins_records(self, tmp_path):
        text = EXCITON_TDSE.replace("  sub_steps: 5",
                                    "  sub_steps: 5\n  sample_every: 4")
        out = tmp_path / "out"
        assert run_cli("run", write(tmp_path, text),
                       "--output-dir", str(out)) == 0
        run = load_run(out / "run.wtra")
        # steps 0 and 4 by stride, 6 because the last step always lands
        assert [r.index for r in run.records] == [0, 4, 6]

    def test_ceom_energy_regression(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write(tmp_path, PHONON_CEOM.format(n_step=8, archive="c.wtra"))
        assert run_cli("run", cfg, "--output-dir", str(out)) == 0
        assert "energy drift" in capsys.readouterr().out
        run = load_run(out / "c.wtra")
        assert run.checkpoints[0][:4] == b"WQCM"
        energies = [r.energy for r in run.records]
        assert np.ptp(energies) < 1e-15

    def test_qcmd_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write(tmp_path, COUPLED_QCMD.format(n_step=6, archive="q.wtra"))
        assert run_cli("run", cfg, "--output-dir", str(out)) == 0
        run = load_run(out / "q.wtra")
        assert run.kind == "qcmd"
        assert run.checkpoints[0][:4] == b"WQCM"
        for rec in run.records:
            assert abs(rec.norm - 1.0) < 1e-12
            assert rec.r_mean.shape == (6,)

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write(tmp_path, EXCITON_TISE)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli("run", cfg, "--output-dir", str(out_a)) == 0
        assert run_cli("run", cfg, "--output-dir", str(out_b)) == 0
        assert (out_a / "run.wtra").read_bytes() == \
            (out_b / "run.wtra").read_bytes()
        assert (out_a / "records.ndjson").read_bytes() == \
            (out_b / "records.ndjson").read_bytes()

    def test_dense_cap_flag_guards_dense_solver(self, tmp_path):
        text = EXCITON_TISE.replace("kind: tise", "kind: tise\n  solver: qe")
        code = run_cli("run", write(tmp_path, text),
                       "--output-dir", str(tmp_path / "o"),
                       "--dense-cap", "8")
        assert code == 3

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_start_aborts(self, tmp_path, capsys):
        text = PHONON_CEOM.format(n_step=2, archive="x.wtra").replace(
            "2: 3.0", "2: .inf")
        code = run_cli("run", write(tmp_path, text),
                       "--output-dir", str(tmp_path / "o"))
        assert code == 3
        assert "step" in capsys.readouterr().err


class TestRestart:
    def split_run(self, tmp_path, template, n_step, kind):
        full = tmp_path / "full"
        cfg = write(tmp_path, template.format(n_step=n_step,
                                              archive="full.wtra"),
                    "full.yaml")
        assert run_cli("run", cfg, "--output-dir", str(full)) == 0

        half = n_step // 2
        part1 = tmp_path / "part1"
        cfg1 = write(tmp_path, template.format(n_step=half,
                                               archive="part.wtra"),
                     "part1.yaml")
        assert run_cli("run", cfg1, "--output-dir", str(part1)) == 0

        part2 = tmp_path / "part2"
        text2 = template.format(n_step=n_step - half, archive="part.wtra")
        text2 += f"  load_file: {part1 / 'part.wtra'}\n"
        cfg2 = write(tmp_path, text2, "part2.yaml")
        assert run_cli("run", cfg2, "--output-dir", str(part2)) == 0

        run_full = load_run(full / "full.wtra")
        run_split = load_run(part2 / "part.wtra")
        return run_full, run_split

    def test_ceom_split_run_is_identical(self, tmp_path):
        run_full, run_split = self.split_run(tmp_path, PHONON_CEOM, 8, "ceom")
        assert run_full.checkpoints[0] == run_split.checkpoints[0]
        assert run_split.records[0].index == 5

    def test_qcmd_split_run_is_identical(self, tmp_path):
        run_full, run_split = self.split_run(tmp_path, COUPLED_QCMD, 6,
                                             "qcmd")
        assert run_full.checkpoints[0] == run_split.checkpoints[0]

    def test_tdse_restart_needs_quantum_checkpoint(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write(tmp_path, PHONON_CEOM.format(n_step=2, archive="c.wtra"))
        assert run_cli("run", cfg, "--output-dir", str(out)) == 0
        text = EXCITON_TDSE + f"io:\n  load_file: {out / 'c.wtra'}\n"
        code = run_cli("run", write(tmp_path, text, "restart.yaml"),
                       "--output-dir", str(tmp_path / "o2"))
        assert code == 2
        assert "quantum state" in capsys.readouterr().err


class TestCompare:
    def archived(self, tmp_path, n_step=6, name="a", archive="c.wtra"):
        out = tmp_path / name
        cfg = write(tmp_path, PHONON_CEOM.format(n_step=n_step,
                                                 archive=archive),
                    f"{name}.yaml")
        assert run_cli("run", cfg, "--output-dir", str(out)) == 0
        return out / archive

    def compare_cfg(self, tmp_path, own, target, mode="state"):
        text = PHONON_CEOM.format(n_step=6, archive=own.name)
        text += f"  compare_to: {target}\n  mode: {mode}\n"
        return write(tmp_path, text, "cmp.yaml")

    def test_self_compare_is_zero(self, tmp_path, capsys):
        path = self.archived(tmp_path)
        cfg = self.compare_cfg(tmp_path, path, path)
        assert run_cli("compare", cfg, "--output-dir",
                       str(path.parent)) == 0
        assert "0.000000e+00" in capsys.readouterr().out

    def test_position_series_compare(self, tmp_path, capsys):
        path = self.archived(tmp_path)
        other = self.archived(tmp_path, name="b")
        cfg = self.compare_cfg(tmp_path, path, other, mode="positions")
        assert run_cli("compare", cfg, "--output-dir",
                       str(path.parent)) == 0
        assert "largest deviation" in capsys.readouterr().out

    def test_mismatched_grids_rejected(self, tmp_path, capsys):
        path = self.archived(tmp_path)
        other = self.archived(tmp_path, n_step=4, name="b")
        cfg = self.compare_cfg(tmp_path, path, other, mode="positions")
        assert run_cli("compare", cfg, "--output-dir",
                       str(path.parent)) == 2
        assert "different numbers" in capsys.readouterr().err

    def test_missing_compare_target(self, tmp_path, capsys):
        cfg = write(tmp_path, PHONON_CEOM.format(n_step=2, archive="c.wtra"))
        assert run_cli("compare", cfg) == 2
        assert "compare_to" in capsys.readouterr().err

    def test_unknown_mode(self, tmp_path, capsys):
        path = self.archived(tmp_path)
        cfg = self.compare_cfg(tmp_path, path, path, mode="phases")
        assert run_cli("compare", cfg, "--output-dir",
                       str(path.parent)) == 2

    def test_corrupt_archive_is_io_failure(self, tmp_path, capsys):
        path = self.archived(tmp_path)
        bad = tmp_path / "bad.wtra"
        bad.write_bytes(b"not an archive at all")
        cfg = self.compare_cfg(tmp_path, path, bad)
        assert run_cli("compare", cfg, "--output-dir",
                       str(path.parent)) == 4
        assert "magic" in capsys.readouterr().err


class TestSweep:
    def test_runs_all_configs(self, tmp_path, capsys):
        sweep = tmp_path / "sweep"
        sweep.mkdir()
        (sweep / "one.yaml").write_text(
            PHONON_CEOM.format(n_step=3, archive="r.wtra"))
        (sweep / "two.yaml").write_text(EXCITON_TISE)
        out = tmp_path / "out"
        assert run_cli("run", "--sweep", str(sweep),
                       "--output-dir", str(out)) == 0
        stdout = capsys.readouterr().out
        assert "[one] ok" in stdout and "[two] ok" in stdout
        assert (out / "one" / "r.wtra").exists()
        assert (out / "two" / "run.wtra").exists()

    def test_reports_worst_exit_code(self, tmp_path, capsys):
        sweep = tmp_path / "sweep"
        sweep.mkdir()
        (sweep / "good.yaml").write_text(
            PHONON_CEOM.format(n_step=2, archive="r.wtra"))
        (sweep / "broken.yaml").write_text("model:\n  kind: exciton\n")
        out = tmp_path / "out"
        assert run_cli("run", "--sweep", str(sweep),
                       "--output-dir", str(out)) == 2
        stdout = capsys.readouterr().out
        assert "[good] ok" in stdout
        assert "[broken] exit 2" in stdout
        assert (out / "good" / "r.wtra").exists()

    def test_empty_sweep_dir(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert run_cli("run", "--sweep", str(empty)) == 4

    def test_run_without_config_or_sweep(self, tmp_path, capsys):
        assert run_cli("run") == 2
