import re
import shutil
import subprocess

import pytest

from colored_ito.experiment import AggregateRecord, ConvergenceRecord, aggregate
from colored_ito.output import AGGREGATE_HEADER, MEMBER_HEADER, emit_csv, emit_plot_script, read_csv


def member(alpha=0.0, dt=0.1, corrected=False, realization=0, err=0.1):
    return ConvergenceRecord(alpha, dt, "euler_forward", 0.0, corrected, realization, err)


def aggregates(alphas, dts, variants=((False,), (True,))):
    out = []
    for a in alphas:
        for dt in dts:
            for (c,) in variants:
                out.append(AggregateRecord(a, dt, "euler_forward", 0.0, c, dt**0.5 * (1 + a), 0.1 * dt, 100))
    return out


def check_script(text, n_alphas, n_panels):
    """Lexical validation of an emitted gnuplot script."""
    lines = text.splitlines()
    blocks = re.findall(r"^\$(ALPHA\d+) << EOD$", text, flags=re.M)
    assert len(blocks) == n_alphas
    assert len(set(blocks)) == n_alphas
    # every data block is closed and every data row has dt + mean/std per panel
    inside = None
    for line in lines:
        if line.endswith("<< EOD"):
            assert inside is None
            inside = line
        elif line == "EOD":
            assert inside is not None
            inside = None
        elif inside is not None:
            cells = line.split()
            assert len(cells) == 1 + 2 * n_panels
            for c in cells:
                float(c)
    assert inside is None
    # every referenced block exists
    assert set(re.findall(r"\$(ALPHA\d+) using", text)) == set(blocks)
    assert text.count("ref05(x) =") == 1 and text.count("ref10(x) =") == 1
    assert len(re.findall(r"^set multiplot", text, flags=re.M)) == 1
    assert len(re.findall(r"^unset multiplot", text, flags=re.M)) == 1
    plots = re.findall(r"^plot ", text, flags=re.M)
    assert len(plots) == n_panels
    for line in lines:
        if not line.startswith("#"):
            assert line.count("'") % 2 == 0


class TestCsv:
    def test_empty_is_header_only(self, tmp_path):
        path = emit_csv([], tmp_path / "m.csv")
        assert path.read_text() == ",".join(MEMBER_HEADER) + "\n"
        path = emit_csv([], tmp_path / "a.csv", aggregate=True)
        assert path.read_text() == ",".join(AGGREGATE_HEADER) + "\n"
        assert read_csv(path) == []

    def test_one_record_round_trip(self, tmp_path):
        rec = member(alpha=1e-5, dt=1 / 94, corrected=True, realization=3, err=0.1 + 1e-17)
        path = emit_csv([rec], tmp_path / "m.csv")
        assert len(path.read_text().splitlines()) == 2
        assert read_csv(path) == [rec]

    def test_seventeen_significant_digits(self, tmp_path):
        path = emit_csv([member(dt=1 / 3, err=2 / 3)], tmp_path / "m.csv")
        row = path.read_text().splitlines()[1].split(",")
        assert row[1] == "3.3333333333333331e-01"

    def test_rows_sorted(self, tmp_path):
        recs = [member(alpha=1.0, realization=1), member(alpha=0.0, realization=2),
                member(alpha=0.0, realization=0), member(alpha=0.0, dt=0.05)]
        back = read_csv(emit_csv(recs, tmp_path / "m.csv"))
        keys = [(r.alpha, r.dt, r.scheme, r.realization) for r in back]
        assert keys == sorted(keys)

    def test_aggregate_round_trip(self, tmp_path):
        members = [member(realization=r, err=0.1 * (r + 1)) for r in range(5)]
        aggs = aggregate(members)
        assert read_csv(emit_csv(aggs, tmp_path / "a.csv")) == aggs

    def test_unwritable_path_in_message(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            emit_csv([member()], blocker / "sub" / "m.csv")

    def test_unknown_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_csv(p)


class TestPlotScript:
    def test_single_alpha(self, tmp_path):
        aggs = aggregates([0.0], [0.1, 0.05, 0.025], variants=((True,),))
        text = emit_plot_script(aggs, tmp_path / "p.gp").read_text()
        check_script(text, n_alphas=1, n_panels=1)
        assert "order 0.5" in text and "order 1" in text

    def test_five_alphas_distinct_styles(self, tmp_path):
        aggs = aggregates([0.0, 1e-6, 1e-5, 1e-4, 1.0], [0.1, 0.05, 0.025])
        text = emit_plot_script(aggs, tmp_path / "p.gp").read_text()
        check_script(text, n_alphas=5, n_panels=2)
        first_panel = re.split(r"^plot ", text, flags=re.M)[1].split("set title")[0]
        styles = re.findall(r"lc (\d+) pt (\d+)", first_panel)
        assert len(styles) == 5 and len(set(styles)) == 5
        # uncorrected panel comes first
        titles = re.findall(r"set title '(.*)'", text)
        assert "without" in titles[0] and "with Ito" in titles[1]

    def test_reference_lines_bracket_data(self, tmp_path):
        aggs = aggregates([0.0, 1.0], [0.1, 0.05, 0.025])
        text = emit_plot_script(aggs, tmp_path / "p.gp").read_text()
        upper = float(re.search(r"ref05\(x\) = (\S+)", text).group(1))
        lower = float(re.search(r"ref10\(x\) = (\S+)", text).group(1))
        dt = 0.1
        means = [a.mean_error for a in aggs if a.dt == dt]
        assert upper * dt**0.5 > max(means)
        assert lower * dt < min(means)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot_script([], tmp_path / "p.gp")

    @pytest.mark.skipif(shutil.which("gnuplot") is None, reason="gnuplot not installed")
    def test_gnuplot_accepts_script(self, tmp_path):
        aggs = aggregates([0.0, 1e-4], [0.1, 0.05, 0.025])
        path = emit_plot_script(aggs, tmp_path / "p.gp", image=str(tmp_path / "p.png"))
        subprocess.run(["gnuplot", str(path)], check=True, cwd=tmp_path)
