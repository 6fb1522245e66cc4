import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmee.bench import (
    CsvSource,
    ExperimentPlan,
    ResultRow,
    ToySource,
    _run_rep,
    accuracy,
    confusion_matrix,
    emit_plot_data,
    read_results,
    run_experiment,
    toy_grid,
    write_results,
)
from rmee.data_contamination import ContaminationSpec
from rmee.exceptions import InvalidInputError, InvalidParameterError
from rmee.hq_optimizer import FitConfig

FAST = FitConfig(max_outer_iters=10, inner_steps=10)


def tiny_plan(**kw):
    base = dict(
        source=ToySource(60, 60, 3),
        grid=[ContaminationSpec("attribute", 0.0), ContaminationSpec("attribute", 0.2, 100.0)],
        criteria=("CE", "RMEE"),
        repetitions=2,
        fit_config=FAST,
    )
    base.update(kw)
    return ExperimentPlan(**base)


def test_accuracy_examples():
    assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0
    assert accuracy([1, 0, 1], [0, 1, 0]) == 0.0
    assert accuracy([1, 0, 1, 1], [1, 0, 0, 1]) == 0.75


def test_accuracy_rejects():
    with pytest.raises(InvalidInputError):
        accuracy([1, 0], [1])
    with pytest.raises(InvalidInputError):
        accuracy([], [])


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50))
def test_confusion_matrix_sums(pairs):
    p, t = zip(*pairs)
    tp, tn, fp, fn = confusion_matrix(p, t)
    assert tp + tn + fp + fn == len(pairs)
    assert (tp + tn) / len(pairs) == pytest.approx(accuracy(p, t))


def test_plan_validation():
    with pytest.raises(InvalidParameterError):
        tiny_plan(criteria=())
    with pytest.raises(InvalidParameterError):
        tiny_plan(repetitions=0)
    with pytest.raises(InvalidParameterError):
        tiny_plan(sigma="auto")
    with pytest.raises(InvalidParameterError):
        tiny_plan(model="svm")
    assert tiny_plan(criteria=("c-loss",)).criteria == ("CLOSS",)


def test_single_repetition_has_zero_std():
    rows = run_experiment(tiny_plan(repetitions=1))
    assert all(r.std_accuracy == 0.0 and r.repetitions == 1 for r in rows)


def test_rows_sorted_and_bounded():
    rows = run_experiment(tiny_plan(criteria=("RMEE", "CE")))
    assert [r.criterion for r in rows] == ["CE", "CE", "RMEE", "RMEE"]
    assert [r.proportion for r in rows] == [0.0, 0.2, 0.0, 0.2]
    assert all(0 <= r.mean_accuracy <= 1 and r.std_accuracy >= 0 for r in rows)


def test_cells_have_independent_streams():
    plan = tiny_plan()
    edited = tiny_plan(grid=[ContaminationSpec("attribute", 0.0), ContaminationSpec("attribute", 0.6, 5.0)])
    assert _run_rep(plan, 0, 1) == _run_rep(edited, 0, 1)


def test_test_split_never_contaminated(monkeypatch):
    import rmee.bench as bench

    seen = []
    real = bench.contaminate

    def spy(ds, spec, rng=None):
        seen.append(len(ds))
        return real(ds, spec, rng)

    monkeypatch.setattr(bench, "contaminate", spy)
    run_experiment(tiny_plan(source=ToySource(50, 70, 3), repetitions=1, criteria=("CE",)))
    assert seen and all(n == 50 for n in seen)


def test_failed_fit_counted(monkeypatch):
    import rmee.bench as bench
    from rmee.exceptions import NumericFailure

    real = bench.fit

    def flaky(model, X, t, spec, cfg):
        if spec.kind == "CE":
            raise NumericFailure("boom")
        return real(model, X, t, spec, cfg)

    monkeypatch.setattr(bench, "fit", flaky)
    rows = run_experiment(tiny_plan())
    ce = [r for r in rows if r.criterion == "CE"]
    assert all(r.repetitions == 0 and r.failed == 2 and np.isnan(r.mean_accuracy) for r in ce)
    assert all(r.repetitions == 2 for r in rows if r.criterion == "RMEE")


def test_byte_identical_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results(run_experiment(tiny_plan()), a)
    write_results(run_experiment(tiny_plan()), b)
    assert a.read_bytes() == b.read_bytes()


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results(run_experiment(tiny_plan()), a)
    write_results(run_experiment(tiny_plan(n_jobs=2)), b)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("sigma", ["silverman", "cv"])
def test_sigma_policies_run(sigma):
    plan = tiny_plan(sigma=sigma, repetitions=1, sigma_grid=(0.3, 0.8), criteria=("CLOSS",))
    rows = run_experiment(plan)
    assert all(r.repetitions == 1 for r in rows)


def test_csv_source(bcw_path):
    plan = ExperimentPlan(CsvSource(str(bcw_path), -1, "malignant"), [ContaminationSpec("label_maj_to_min", 0.1)],
                          criteria=("MSE",), model="elm", hidden=10, repetitions=1, fit_config=FAST)
    assert plan.do_normalize
    (row,) = run_experiment(plan)
    assert row.mode == "label_maj_to_min" and row.parameter == "maj_to_min"
    assert row.mean_accuracy > 0.8


# -- writers -------------------------------------------------------------------

def test_write_header_only(tmp_path):
    p = tmp_path / "r.csv"
    write_results([], p)
    assert p.read_bytes() == b"criterion,mode,parameter,proportion,mean_acc,std_acc,reps\n"


def test_write_one_row_roundtrip(tmp_path):
    p = tmp_path / "r.csv"
    row = ResultRow("RMEE", "attribute", 100.0, 0.4, 0.87654321, 0.0123456789, 20)
    write_results([row], p)
    text = p.read_bytes()
    assert text.count(b"\n") == 2 and b"\r" not in text
    assert text.splitlines()[1] == b"RMEE,attribute,100.000000,0.400000,0.876543,0.012346,20"
    (back,) = read_results(p)
    assert back.mean_accuracy == pytest.approx(row.mean_accuracy, abs=5e-7)
    assert back.parameter == 100.0 and back.repetitions == 20


def test_write_reports_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        write_results([], tmp_path / "nope" / "r.csv")


def test_plot_data_shape(tmp_path):
    props = [round(0.05 * i, 2) for i in range(21)]
    crits = ["CE", "MSE", "CLOSS", "QMEE", "RMEE"]
    rows = [ResultRow(c, "attribute", 100.0, p, 0.5, 0.1, 3) for c in crits for p in props[::-1]]
    (path,) = emit_plot_data(rows, str(tmp_path / "fig"))
    assert path.endswith("fig_attribute_100.dat")
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    assert len(lines) == 21
    assert all(len(ln.split()) == 11 for ln in lines)
    col = [float(ln.split()[0]) for ln in lines]
    assert all(a < b for a, b in zip(col, col[1:]))


def test_plot_data_missing_cell_is_nan(tmp_path):
    rows = [ResultRow("CE", "label_maj_to_min", "maj_to_min", 0.1, 0.9, 0.0, 1),
            ResultRow("RMEE", "label_maj_to_min", "maj_to_min", 0.2, 0.8, 0.0, 1)]
    (path,) = emit_plot_data(rows, str(tmp_path / "p"))
    lines = open(path).read().splitlines()[1:]
    assert lines[0].split()[3:] == ["nan", "nan"]
    assert lines[1].split()[1:3] == ["nan", "nan"]


def test_plot_groups_by_mode_and_parameter(tmp_path):
    rows = run_experiment(tiny_plan(grid=toy_grid("attribute", [0.0, 0.5], [5.0, 100.0]), repetitions=1))
    paths = emit_plot_data(rows, str(tmp_path / "g"))
    assert sorted(p.rsplit("/", 1)[1] for p in paths) == ["g_attribute_100.dat", "g_attribute_5.dat"]


def test_toy_grid_default():
    grid = toy_grid()
    assert len(grid) == 63
    assert {g.attribute_cov_scale for g in grid} == {5.0, 100.0, 1000.0}
    assert len(toy_grid("label_maj_to_min")) == 21
