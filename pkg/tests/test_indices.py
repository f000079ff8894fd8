import numpy as np
import pytest

from conetube.errors import ConventionError, InvalidInputError
from conetube.indices import (Convention, MultiIndex, bold_values,
                              plain_values, shift_index, unshift_index)


def test_shift_n2_offset_vanishes():
    s = shift_index(MultiIndex((1.0, 1.0)))
    assert s.convention is Convention.SHIFTED
    assert s.entries == (1.0, 1.0)


def test_shift_n3_offsets_first_two():
    s = shift_index(MultiIndex((0.0, 0.0, 0.0)))
    assert s.entries == (0.5, 0.5, 0.0)


def test_shift_n1_trivial():
    s = shift_index(MultiIndex((2.25,)))
    assert s.entries == (2.25,)
    assert s.convention is Convention.SHIFTED


def test_round_trip_identity():
    for n in (1, 2, 3, 5):
        vals = tuple(np.linspace(-2.0, 3.0, n))
        s = MultiIndex(vals)
        assert unshift_index(shift_index(s)).entries == vals


def test_double_shift_is_error():
    s = shift_index(MultiIndex((0.0, 1.0, 2.0)))
    with pytest.raises(ConventionError):
        shift_index(s)
    with pytest.raises(ConventionError):
        unshift_index(MultiIndex((0.0, 1.0)))


def test_plain_and_bold_values():
    s = MultiIndex((0.0, 0.0, 1.0))
    assert np.allclose(bold_values(s), [0.5, 0.5, 1.0])
    sh = shift_index(s)
    assert np.allclose(plain_values(sh), [0.0, 0.0, 1.0])
    assert np.allclose(bold_values(sh), [0.5, 0.5, 1.0])
    # bare arrays are read as plain
    assert np.allclose(plain_values([1.0, 2.0]), [1.0, 2.0])
    assert np.allclose(bold_values([1.0, 2.0, 3.0]), [1.5, 2.5, 3.0])


def test_empty_index_rejected():
    with pytest.raises(InvalidInputError):
        MultiIndex(())


def test_length_check():
    with pytest.raises(InvalidInputError):
        plain_values(MultiIndex((1.0, 2.0)), 3)
