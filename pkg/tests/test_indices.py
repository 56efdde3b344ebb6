import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bktwistor import _pykernels
from bktwistor.indices import (
    IndexSymbol,
    MultiIndex,
    normalize,
    normalize_keys,
    reduced_length,
    sign_to_json,
)
from bktwistor.oracles import clifford_normal_form, random_rewrite, rewrite_normal_forms

import numpy as np


def V(*vals):
    return MultiIndex.of(vals)


@pytest.mark.parametrize("word, sign, reduced", [
    ((2, 1), -1, (1, 2)),
    ((1, 1), -1, ()),
    ((), 1, ()),
    ((2, 1, 2), 1, (1,)),
])
def test_normalize_examples(word, sign, reduced):
    s, red = normalize(V(*word))
    assert s == sign
    assert red == V(*reduced)


@pytest.mark.parametrize("word, length", [((1, 2, 3), 3), ((1, 1), 0), ((2, 1, 2), 1)])
def test_reduced_length(word, length):
    assert reduced_length(V(*word)) == length


def test_w_letters_sort_after_v_letters():
    idx = MultiIndex((IndexSymbol("W", 0), IndexSymbol("V", 3)))
    sign, red = normalize(idx)
    assert sign == -1
    assert red == MultiIndex.of([3], [0])


def test_symbol_validation():
    with pytest.raises(ValueError):
        IndexSymbol("X", 1)
    with pytest.raises(ValueError):
        IndexSymbol("V", -1)


def test_json_roundtrip_block_and_interleaved():
    block = MultiIndex.of([0, 2], [1])
    assert block.to_json() == {"v": [0, 2], "w": [1]}
    assert MultiIndex.from_json(block.to_json()) == block
    mixed = MultiIndex((IndexSymbol("W", 1), IndexSymbol("V", 2), IndexSymbol("W", 0)))
    assert MultiIndex.from_json(mixed.to_json()) == mixed


def test_sign_json():
    assert sign_to_json(-1) == -1
    with pytest.raises(ValueError):
        sign_to_json(0)


def test_exhaustive_all_orders_length_6():
    memo = {}
    letters = [0, 1, 2, 3]
    for n in range(7):
        for word in itertools.product(letters, repeat=n):
            ref = normalize_keys(word)
            assert rewrite_normal_forms(word, memo) == {ref}
            assert clifford_normal_form(word) == ref


words = st.lists(st.integers(0, 7), max_size=16)


@given(words, st.integers(0, 2 ** 32 - 1))
def test_random_strategy_agrees(word, seed):
    assert random_rewrite(word, np.random.default_rng(seed)) == normalize_keys(word)


@given(words)
def test_parity_and_sign(word):
    sign, red = normalize_keys(word)
    assert sign in (1, -1)
    assert (len(word) - len(red)) % 2 == 0
    assert list(red) == sorted(set(red))


@given(st.lists(st.integers(0, 5), min_size=2, max_size=10), st.data())
def test_swap_involution(word, data):
    pos = [i for i in range(len(word) - 1) if word[i] != word[i + 1]]
    if not pos:
        return
    p = data.draw(st.sampled_from(pos))
    swapped = list(word)
    swapped[p], swapped[p + 1] = swapped[p + 1], swapped[p]
    s0, r0 = normalize_keys(word)
    s1, r1 = normalize_keys(swapped)
    assert (s1, r1) == (-s0, r0)


@given(words, words)
def test_concatenation_rule(I, J):
    sI, rI = normalize_keys(I)
    sJ, rJ = normalize_keys(J)
    s, r = normalize_keys(list(rI) + list(rJ))
    assert normalize_keys(I + J) == (sI * sJ * s, r)


@given(words)
def test_compiled_and_python_kernels_agree(word):
    from bktwistor import kernels
    assert kernels.normalize_positions(word) == _pykernels.normalize_positions(word)
