"""File formats: the exchange-format reader/writer pair and the CSV layer."""

import numpy as np
import pytest

from kaczmarz.errors import MatrixMarketError, NonFiniteError, UnsupportedFormatError
from kaczmarz.generate import InstanceSpec, generate
from kaczmarz.matrices import DualSparseMatrix
from kaczmarz.mmio import (
    format_float,
    read_csv,
    read_matrix_market,
    read_vector,
    write_csv,
    write_matrix_market,
    write_vector,
)


def test_format_float_round_trips_awkward_values():
    for x in (0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 1e-308, -0.0):
        assert float(format_float(x)) == x


def test_sparse_matrix_round_trip_is_bit_exact(tmp_path):
    a, _, _ = generate(InstanceSpec(kind="sparse", m=17, n=9, density=0.3, seed=1))
    p = tmp_path / "a.mtx"
    write_matrix_market(p, a, comment="round trip probe")
    back = read_matrix_market(p)
    assert isinstance(back, DualSparseMatrix)
    np.testing.assert_array_equal(back.to_dense(), a.to_dense())
    assert back.nnz == a.nnz


def test_dense_array_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    arr = rng.standard_normal((5, 3))
    p = tmp_path / "dense.mtx"
    write_matrix_market(p, arr)
    back = read_matrix_market(p)
    np.testing.assert_array_equal(back, arr)


def test_vector_round_trip(tmp_path):
    vec = np.array([0.1, -1.0 / 7.0, 3e300, 0.0])
    p = tmp_path / "v.mtx"
    write_vector(p, vec)
    np.testing.assert_array_equal(read_vector(p), vec)


def test_coordinate_file_uses_one_based_indices(tmp_path):
    a = DualSparseMatrix.from_triplets([0, 2], [0, 1], [1.5, -2.0], (3, 2))
    p = tmp_path / "idx.mtx"
    write_matrix_market(p, a)
    text = p.read_text()
    lines = text.splitlines()
    assert lines[0].endswith("matrix coordinate real general")
    assert lines[1] == "3 2 2"
    assert lines[2].startswith("1 1 ")
    assert lines[3].startswith("3 2 ")


def test_array_file_is_column_major(tmp_path):
    arr = np.array([[1.0, 2.0], [3.0, 4.0]])
    p = tmp_path / "cm.mtx"
    write_matrix_market(p, arr)
    data_lines = [ln for ln in p.read_text().splitlines()[2:]]
    assert [float(ln) for ln in data_lines] == [1.0, 3.0, 2.0, 4.0]


def test_reader_sums_duplicate_coordinates(tmp_path):
    p = tmp_path / "dup.mtx"
    p.write_text(
        "%%MatrixMarket matrix coordinate real general\n"
        "2 2 3\n"
        "1 1 2.0\n"
        "1 1 0.5\n"
        "2 2 1.0\n"
    )
    a = read_matrix_market(p)
    np.testing.assert_array_equal(a.to_dense(), [[2.5, 0.0], [0.0, 1.0]])


def test_reader_accepts_comments_blanks_and_integer_field(tmp_path):
    p = tmp_path / "mixed.mtx"
    p.write_text(
        "%%MatrixMarket matrix coordinate integer general\n"
        "% a comment\n"
        "\n"
        "2 3 2\n"
        "% another\n"
        "1 3 7\n"
        "2 1 -4\n"
    )
    a = read_matrix_market(p)
    np.testing.assert_array_equal(a.to_dense(), [[0.0, 0.0, 7.0], [-4.0, 0.0, 0.0]])


@pytest.mark.parametrize(
    "content, lineno_fragment",
    [
        ("not a banner\n1 1 1\n1 1 1.0\n", "line 1"),
        ("%%MatrixMarket matrix coordinate real\n", "line 1"),
        ("%%MatrixMarket matrix coordinate real general\n1 1\n", "line 2"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", "line 2"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", "line 3"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", "line 3"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 inf\n", "line 3"),
        ("%%MatrixMarket matrix coordinate real general\n-1 2 0\n", "line 2"),
        ("%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n", "line 2"),
        ("%%MatrixMarket matrix array real general\n2 1\n1.0\n1.0 2.0\n", "line 4"),
    ],
)
def test_malformed_files_report_line_numbers(tmp_path, content, lineno_fragment):
    p = tmp_path / "bad.mtx"
    p.write_text(content)
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert lineno_fragment in str(exc.value)


@pytest.mark.parametrize(
    "banner",
    [
        "%%MatrixMarket matrix coordinate complex general",
        "%%MatrixMarket matrix coordinate pattern general",
        "%%MatrixMarket matrix coordinate real symmetric",
        "%%MatrixMarket vector coordinate real general",
        "%%MatrixMarket matrix elemental real general",
    ],
)
def test_unsupported_flavors_are_refused(tmp_path, banner):
    p = tmp_path / "unsup.mtx"
    p.write_text(banner + "\n1 1 1\n1 1 1.0\n")
    with pytest.raises(UnsupportedFormatError):
        read_matrix_market(p)


def test_empty_and_truncated_files(tmp_path):
    p = tmp_path / "empty.mtx"
    p.write_text("")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p)
    p.write_text("%%MatrixMarket matrix coordinate real general\n")
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert "size" in str(exc.value)


def test_read_vector_rejects_matrices(tmp_path):
    p = tmp_path / "wide.mtx"
    write_matrix_market(p, np.ones((2, 2)))
    with pytest.raises(MatrixMarketError):
        read_vector(p)


def test_writer_refuses_non_finite(tmp_path):
    with pytest.raises(NonFiniteError):
        write_matrix_market(tmp_path / "nan.mtx", np.array([np.nan]))


def test_csv_round_trip_and_cell_conventions(tmp_path):
    p = tmp_path / "t.csv"
    rows = [
        {"name": "a", "val": 0.1, "flag": True, "count": 3, "opt": None},
        {"name": "b", "val": -1.0 / 3.0, "flag": False, "count": 0, "opt": "x"},
    ]
    write_csv(p, ["name", "val", "flag", "count", "opt"], rows)
    text = p.read_bytes().decode()
    assert "\r" not in text  # LF only
    assert "true" in text and "false" in text
    lines = text.splitlines()
    assert lines[0] == "name,val,flag,count,opt"
    assert lines[1].endswith(",")  # None became the empty cell
    back = read_csv(p)
    assert back[0]["val"] == format_float(0.1)
    assert float(back[1]["val"]) == -1.0 / 3.0
    assert back[0]["opt"] == ""


def test_csv_is_deterministic(tmp_path):
    rows = [{"x": 1.2345678901234567, "y": 9}]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(p1, ["x", "y"], rows)
    write_csv(p2, ["x", "y"], rows)
    assert p1.read_bytes() == p2.read_bytes()
