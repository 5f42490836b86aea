import numpy as np
import pytest

from oscluster import (
    ConstantRow,
    LabelLengthMismatch,
    MalformedRow,
    NonFinite,
    TooSmall,
    load_labels,
    load_matrix,
    standardize,
    validate,
)


def test_minimal_legal_input():
    dm = validate([[1, 2], [3, 4]])
    assert dm.n_samples == 2 and dm.n_features == 2
    assert dm.labels is None


def test_nan_position_reported():
    with pytest.raises(NonFinite) as err:
        validate([[1.0, np.nan], [3.0, 4.0]])
    assert (err.value.row, err.value.col) == (0, 1)


def test_inf_rejected():
    with pytest.raises(NonFinite):
        validate([[1.0, 2.0], [np.inf, 4.0]])


def test_label_length_mismatch():
    with pytest.raises(LabelLengthMismatch):
        validate(np.ones((4, 3)) + np.arange(12).reshape(4, 3), labels=[0, 1, 2])


def test_negative_labels_rejected():
    with pytest.raises(LabelLengthMismatch):
        validate([[1, 2], [3, 4]], labels=[0, -1])


def test_too_small():
    with pytest.raises(TooSmall):
        validate([[1, 2]])
    with pytest.raises(TooSmall):
        validate([[1], [2]])


def test_standardize_hand_example():
    # row (1,2,3): mean 2, var (1+0+1)/2 = 1, standardized (-1,0,1)
    dm = validate([[1, 2, 3], [5, 1, 9]])
    view = standardize(dm)
    assert view.mu[0] == pytest.approx(2.0)
    assert view.sigma[0] == pytest.approx(1.0)
    assert np.allclose(view.y[:, 0], [-1.0, 0.0, 1.0])


def test_identical_rows_correlate_to_one():
    dm = validate([[1.0, 4.0, 2.0], [1.0, 4.0, 2.0], [9.0, 0.0, 3.0]])
    view = standardize(dm)
    assert view.r_samples[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_constant_row_error_lists_indices():
    dm = validate([[5.0, 5.0, 5.0], [1.0, 2.0, 3.0], [7.0, 7.0, 7.0]])
    with pytest.raises(ConstantRow) as err:
        standardize(dm)
    assert err.value.indices == (0, 2)


def test_reconstruction_round_trip(rng):
    x = rng.normal(size=(12, 30)) * 5 + 2
    view = standardize(validate(x))
    rebuilt = (view.sigma[:, None] * view.y.T) + view.mu[:, None]
    assert np.allclose(rebuilt, x, rtol=1e-10, atol=1e-10)


def test_correlations_bounded(rng):
    x = rng.normal(size=(20, 15))
    view = standardize(validate(x))
    assert view.r_samples.max() <= 1 + 1e-10
    assert view.r_samples.min() >= -1 - 1e-10
    assert np.abs(np.diag(view.r_samples) - 1).max() < 1e-10
    assert np.abs(view.r_samples - view.r_samples.T).max() < 1e-12
    eigs = np.linalg.eigvalsh(view.r_samples)
    assert eigs.min() >= -1e-8 * eigs.max()


def test_affine_row_invariance(rng):
    x = rng.normal(size=(8, 20))
    y1 = standardize(validate(x)).y
    x2 = x.copy()
    x2[3] = 2.5 * x2[3] + 7.0
    y2 = standardize(validate(x2)).y
    assert np.allclose(y1[:, 3], y2[:, 3], atol=1e-10)


# ------------------------------------------------------------- ingestion

def test_load_matrix_plain(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1.0,2.0\n3.0,4.5\n", encoding="utf-8")
    assert np.array_equal(load_matrix(f), [[1.0, 2.0], [3.0, 4.5]])


def test_load_matrix_header_and_crlf(tmp_path):
    f = tmp_path / "m.csv"
    f.write_bytes(b"colA,colB\r\n1,2\r\n3,4\r\n")
    assert np.array_equal(load_matrix(f), [[1.0, 2.0], [3.0, 4.0]])


def test_load_matrix_numeric_first_line_is_data(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,label\n", encoding="utf-8")
    # mixed header fields are not a tolerated header
    with pytest.raises(MalformedRow):
        load_matrix(f)


def test_load_matrix_ragged(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2\n3,4,5\n", encoding="utf-8")
    with pytest.raises(MalformedRow):
        load_matrix(f)


def test_load_labels(tmp_path):
    f = tmp_path / "y.txt"
    f.write_text("0\n2\n1\n\n", encoding="utf-8")
    assert np.array_equal(load_labels(f), [0, 2, 1])
    bad = tmp_path / "bad.txt"
    bad.write_text("0\nx\n", encoding="utf-8")
    with pytest.raises(MalformedRow):
        load_labels(bad)
