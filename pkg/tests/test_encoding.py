import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkga.encoding import (Chromosome, EncodingError, GateKind, PlacedGate, decode_chromosome,
                           decode_gene, encode_circuit, random_chromosome, render_gate_list,
                           render_text, size_metric, weighted_size)


@pytest.mark.parametrize("bits,kind,prop", [
    ("00001", GateKind.H, math.pi / 2),
    ("11110", GateKind.RY, math.pi / 4),
    ("01000", GateKind.I, math.pi),
])
def test_decode_gene_examples(bits, kind, prop):
    g = decode_gene(bits)
    assert g.kind is kind
    assert g.proportionality == prop


@pytest.mark.parametrize("bad", ["", "0000", "000000", "0a001"])
def test_decode_gene_rejects_malformed(bad):
    with pytest.raises(EncodingError):
        decode_gene(bad)


def test_three_identity_patterns():
    kinds = [decode_gene(f"{k:03b}00").kind for k in range(8)]
    assert kinds.count(GateKind.I) == 3


def test_decode_chromosome_round_robin():
    c = Chromosome("00001" + "11110" + "01000" + "00100", 2, 2)
    fm = decode_chromosome(c)
    assert fm.placement() == [
        (0, GateKind.H, 0, None, None),
        (1, GateKind.RY, 1, 1, None),
        (3, GateKind.CNOT, 1, None, 0),
    ]
    assert fm.gates[1].proportionality == math.pi / 4
    assert fm.overrides is None


def test_all_identity_is_empty():
    fm = decode_chromosome(Chromosome("01000" * 4, 2, 2))
    assert fm.gates == ()
    assert size_metric(fm).sm == 0


def test_single_slot_rz():
    fm = decode_chromosome(Chromosome("10000", 1, 1))
    (g,) = fm.gates
    assert (g.kind, g.qubit, g.feature, g.proportionality) == (GateKind.RZ, 0, 0, math.pi)


def test_feature_wrap_when_data_is_narrower_than_layers():
    # slot 4 on M=1, N=6 binds feature 4; with 2-D data it wraps to 0
    c = Chromosome("01000" * 4 + "11100" + "01000", 1, 6)
    assert decode_chromosome(c).gates[0].feature == 4
    assert decode_chromosome(c, n_features=2).gates[0].feature == 0


def test_cnot_skipped_on_single_qubit():
    assert decode_chromosome(Chromosome("00100" + "00000", 1, 2)).placement() == [
        (1, GateKind.H, 0, None, None)]


def test_chromosome_length_checked():
    with pytest.raises(EncodingError):
        Chromosome("0" * 19, 2, 2)


def test_encode_examples():
    assert encode_circuit(decode_chromosome(Chromosome("01000", 1, 1)), 1, 1).bits == "01000"
    c = Chromosome("10100" + "00000", 2, 1)
    assert encode_circuit(decode_chromosome(c), 2, 1).bits == "01000" + "00000"


def test_encode_rejects_overrides_and_bad_budgets():
    fm = decode_chromosome(Chromosome("11100", 1, 1))
    with pytest.raises(EncodingError):
        encode_circuit(fm.with_overrides([0.3]), 1, 1)
    fm2 = decode_chromosome(Chromosome("00000" * 4, 2, 2))
    with pytest.raises(EncodingError):
        encode_circuit(fm2, 1, 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_decode_encode_decode_fixpoint(M, N, data):
    bits = data.draw(st.text(alphabet="01", min_size=5 * M * N, max_size=5 * M * N))
    fm = decode_chromosome(Chromosome(bits, M, N))
    again = decode_chromosome(encode_circuit(fm, M, N))
    assert again.gates == fm.gates


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="01", min_size=20, max_size=20), st.integers(0, 4))
def test_sm_invariant_under_identity_insertion(bits, where):
    fm = decode_chromosome(Chromosome(bits, 2, 2))
    genes = [bits[i:i + 5] for i in range(0, 20, 5)]
    genes.insert(where, "01000")
    genes.insert(where, "11000")  # also Identity
    longer = decode_chromosome(Chromosome("".join(genes), 2, 3))
    assert size_metric(longer).sm == size_metric(fm).sm


def test_size_metric_examples():
    gates = tuple(PlacedGate(i, GateKind.H, i % 2, math.pi) for i in range(4))
    gates += (PlacedGate(4, GateKind.CNOT, 0, math.pi, target=1),)
    fm = decode_chromosome(Chromosome("01000" * 6, 2, 3))
    fm = type(fm)(gates, 2, 0, layers=3)
    s = size_metric(fm, accuracy=1.0)
    assert (s.n_local, s.n_cnot, s.sm, s.ws) == (4, 1, 3.0, 6.0)
    assert weighted_size(3.0, 0.0) == 3.0


@given(st.floats(0, 50), st.floats(0, 1), st.floats(0, 1))
def test_ws_monotone_and_bounded(sm, a, b):
    lo, hi = sorted((a, b))
    assert weighted_size(sm, lo) <= weighted_size(sm, hi)
    assert sm <= weighted_size(sm, hi) <= 2 * sm


def test_random_chromosome():
    c1 = random_chromosome(np.random.default_rng(7), 6, 6)
    c2 = random_chromosome(np.random.default_rng(7), 6, 6)
    assert c1 == c2 and len(c1.bits) == 180
    rng = np.random.default_rng(0)
    ones = sum(random_chromosome(rng, 1, 1).bits.count("1") for _ in range(20_000))
    assert abs(ones / 100_000 - 0.5) <= 0.01


def test_renderings():
    fm = decode_chromosome(Chromosome("00001" + "11110" + "01000" + "00100", 2, 2))
    text = render_text(fm).splitlines()
    assert len(text) == 2 and len(set(map(len, text))) == 1
    assert "RY(π/4*x1)" in text[1] and "C>q0" in text[1]
    lines = render_gate_list(fm).splitlines()
    assert lines[0] == "slot,kind,qubit,feature,proportionality"
    assert lines[1] == "0,H,0,,"
    assert lines[2] == f"1,RY,1,1,{math.pi / 4!r}"
    assert lines[3] == "3,CNOT,1>0,,"
