import struct

import numpy as np
import pytest

from dualtree_matmul.io import read_binary, read_csv, read_matrix, write_binary, write_csv, write_matrix
from dualtree_matmul.matrix import MatrixFormatError


def test_csv_round_trip_is_exact(tmp_path, rng):
    m = rng.standard_normal((5, 3)) * 1e3
    path = tmp_path / "m.csv"
    write_csv(path, m)
    np.testing.assert_array_equal(read_csv(path), m)


def test_binary_layout(tmp_path):
    path = tmp_path / "m.bin"
    write_binary(path, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    raw = path.read_bytes()
    assert struct.unpack("<QQ", raw[:16]) == (2, 3)
    assert struct.unpack("<6d", raw[16:]) == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    np.testing.assert_array_equal(read_binary(path), [[1, 2, 3], [4, 5, 6]])


def test_format_by_extension(tmp_path, rng):
    m = rng.standard_normal((2, 2))
    for name in ("a.bin", "a.csv"):
        write_matrix(tmp_path / name, m)
        np.testing.assert_array_equal(read_matrix(tmp_path / name), m)
    assert (tmp_path / "a.csv").read_text().count("\n") == 2


def test_binary_rejects_truncated_and_nonfinite(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(struct.pack("<QQ", 2, 2) + struct.pack("<3d", 1, 2, 3))
    with pytest.raises(MatrixFormatError):
        read_binary(path)
    path.write_bytes(struct.pack("<QQ", 1, 2) + struct.pack("<2d", 1, float("nan")))
    with pytest.raises(MatrixFormatError):
        read_binary(path)


@pytest.mark.parametrize("text", ["1,2\n3\n", "1,x\n", "1,inf\n", ""])
def test_csv_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MatrixFormatError):
        read_csv(path)
