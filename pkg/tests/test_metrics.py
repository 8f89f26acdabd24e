import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from commevo.flows import churn_flows
from commevo.metrics import (
    PartitionPair,
    ari,
    bcubed_node,
    bcubed_pr_labels,
    core_f1,
    harmonic_mean,
    jaccard_f1_convert,
    max_f1,
    nmi,
    standard_f1,
)
from commevo.partition import Partition
from oracles import ari_pair_counting, bcubed_bruteforce, f1, nmi_joint_distribution


def P(*groups):
    return Partition.from_communities([list(g) for g in groups])


def random_partition(rng, nodes, max_groups=4):
    return Partition.from_labels(list(nodes), [rng.randrange(max_groups) for _ in nodes])


# -- node level -------------------------------------------------------------

def test_bcubed_node_examples():
    ref = P("abc", "d")
    assert bcubed_node("a", ref, P("abc", "d")) == (1.0, 1.0)
    assert bcubed_node("a", ref, P("ab", "cd")) == (1.0, pytest.approx(2 / 3))
    # candidate lumps everything: precision drops, recall stays complete
    assert bcubed_node("d", ref, P("abcd")) == (0.25, 1.0)


def test_bcubed_node_ignores_non_overlap_members():
    ref = P("abx", "c")
    cand = P("aby", "c")
    assert bcubed_node("a", ref, cand) == (1.0, 1.0)
    with pytest.raises(KeyError):
        bcubed_node("x", ref, cand)


# -- core F1 ----------------------------------------------------------------

def test_core_f1_against_singletons():
    s = core_f1(P("abc"), P("a", "b", "c"))
    assert s.precision == pytest.approx(1.0)
    assert s.recall == pytest.approx(1 / 3)
    assert s.f1 == pytest.approx(0.5)


def test_core_f1_identical_is_one():
    p = P("ab", "cde", "f")
    assert core_f1(p, p).f1 == pytest.approx(1.0)


def test_core_f1_errors():
    with pytest.raises(ValueError):
        core_f1(P("ab"), P("abc"))
    with pytest.raises(ValueError):
        core_f1(Partition({}), Partition({}))


def test_core_f1_swaps_precision_and_recall():
    a, b = P("abc", "de"), P("ab", "cde")
    s, t = core_f1(a, b), core_f1(b, a)
    assert s.precision == pytest.approx(t.recall)
    assert s.recall == pytest.approx(t.precision)
    assert s.f1 == pytest.approx(t.f1)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10**6))
def test_core_f1_matches_exact_bruteforce(n, seed):
    rng = random.Random(seed)
    nodes = [f"v{i}" for i in range(n)]
    a, b = random_partition(rng, nodes), random_partition(rng, nodes)
    p, r = bcubed_bruteforce(a.communities(), b.communities(), exact=True)
    s = core_f1(a, b)
    assert s.precision == pytest.approx(float(p), abs=1e-12)
    assert s.recall == pytest.approx(float(r), abs=1e-12)
    assert s.f1 == pytest.approx(float(f1(p, r)), abs=1e-12)


def test_label_kernel_batches_rows():
    ref = np.array([[0, 0, 1], [0, 1, 2]])
    cand = np.array([[0, 0, 0], [0, 1, 2]])
    pre, rec = bcubed_pr_labels(ref, cand)
    assert pre.tolist() == pytest.approx([5 / 9, 1.0])
    assert rec.tolist() == pytest.approx([1.0, 1.0])
    pre1, rec1 = bcubed_pr_labels([0, 0, 1], [0, 0, 0])
    assert pre1.tolist() == pytest.approx([5 / 9])


# -- standard / max F1 ------------------------------------------------------

def test_standard_f1_scaling_example():
    # 3 of 4 reference nodes survive and no new nodes appear
    ref, cand = P("abc", "d"), P("abc")
    s = standard_f1(ref, cand)
    assert s.precision == pytest.approx(1.0)
    assert s.recall == pytest.approx(0.75)
    assert s.f1 == pytest.approx(harmonic_mean(1.0, 0.75))
    assert max_f1(ref, cand) == pytest.approx(6 / 7)


def test_standard_f1_disjoint_is_zero():
    assert standard_f1(P("ab"), P("cd")).f1 == 0.0
    assert max_f1(P("ab"), P("cd")) == 0.0


def test_max_f1_examples():
    assert max_f1(P("ab"), P("cd", "ab")) == pytest.approx(2 / 3)
    assert max_f1(P("abcd"), P("ab")) == pytest.approx(2 / 3)
    assert max_f1(P("ab"), P("bc")) == pytest.approx(0.5)
    assert max_f1(P("a"), Partition({})) == 0.0
    with pytest.raises(ValueError):
        max_f1(Partition({}), Partition({}))


def test_partition_pair_decomposition():
    pair = PartitionPair(P("abc", "d"), P("ab", "ce"))
    assert pair.overlap == ("a", "b", "c")
    assert pair.reference_only == ("d",)
    assert pair.candidate_only == ("e",)
    assert pair.ls == P("abc")
    assert pair.cs == P("ab", "c")
    assert not pair.same_nodes


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_standard_f1_matches_bruteforce_and_bound(seed):
    rng = random.Random(seed)
    universe = [f"v{i}" for i in range(10)]
    a_nodes = [n for n in universe if rng.random() < 0.7] or universe[:1]
    b_nodes = [n for n in universe if rng.random() < 0.7] or universe[-1:]
    a, b = random_partition(rng, a_nodes), random_partition(rng, b_nodes)
    p, r = bcubed_bruteforce(a.communities(), b.communities(), exact=True)
    s = standard_f1(a, b)
    assert s.precision == pytest.approx(float(p), abs=1e-12)
    assert s.recall == pytest.approx(float(r), abs=1e-12)
    assert s.f1 <= max_f1(a, b) + 1e-12
    core, new, lost = churn_flows(a, b)
    assert max_f1(a, b) == pytest.approx(2 * core / (2 * core + new + lost), abs=1e-12)


def test_max_f1_reached_when_overlap_agrees():
    a, b = P("abc", "de"), P("abc", "d", "f")
    # restricted to the overlap {a,b,c,d} both are {abc}{d}
    assert standard_f1(a, b).f1 == pytest.approx(max_f1(a, b))


def test_standard_equals_core_on_same_nodes():
    a, b = P("abc", "de"), P("ab", "cde")
    assert standard_f1(a, b) == core_f1(a, b)


# -- Jaccard conversion -----------------------------------------------------

def test_jaccard_conversion_examples():
    assert jaccard_f1_convert(1 / 3, "jaccard_to_f1") == pytest.approx(0.5)
    assert jaccard_f1_convert(0.5, "f1_to_jaccard") == pytest.approx(1 / 3)
    assert jaccard_f1_convert(1.0, "jaccard_to_f1") == 1.0
    assert jaccard_f1_convert(0.0, "f1_to_jaccard") == 0.0
    with pytest.raises(ValueError):
        jaccard_f1_convert(1.5, "jaccard_to_f1")
    with pytest.raises(ValueError):
        jaccard_f1_convert(0.5, "sideways")


@given(st.floats(0, 1))
def test_jaccard_round_trip(x):
    back = jaccard_f1_convert(jaccard_f1_convert(x, "f1_to_jaccard"), "jaccard_to_f1")
    assert abs(back - x) <= 1e-12


def test_max_f1_is_dice_of_node_sets():
    a, b = P("abcd"), P("cdef")
    jac = 2 / 6
    assert max_f1(a, b) == pytest.approx(jaccard_f1_convert(jac, "jaccard_to_f1"))


# -- NMI / ARI --------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10**6))
def test_nmi_ari_against_oracles(n, seed):
    rng = random.Random(seed)
    nodes = [f"v{i}" for i in range(n)]
    a, b = random_partition(rng, nodes, 5), random_partition(rng, nodes, 5)
    la, lb = a.labels(), b.labels(nodes)
    assert nmi(a, b) == pytest.approx(nmi_joint_distribution(la, lb), abs=1e-10)
    assert ari(a, b) == pytest.approx(ari_pair_counting(la, lb), abs=1e-10)
    assert nmi(a, b) == pytest.approx(normalized_mutual_info_score(la, lb), abs=1e-10)
    assert ari(a, b) == pytest.approx(adjusted_rand_score(la, lb), abs=1e-10)
    assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)
    assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-12)


def test_nmi_ari_identity_and_degenerate():
    p = P("abc", "de")
    assert nmi(p, p) == pytest.approx(1.0)
    assert ari(p, p) == pytest.approx(1.0)
    one = P("abcde")
    assert nmi(one, one) == 1.0
    assert ari(one, one) == 1.0
    assert nmi(one, P("a", "b", "c", "d", "e")) == 0.0
    with pytest.raises(ValueError):
        nmi(P("ab"), P("abc"))


def test_relabelling_invariance():
    nodes = list("abcdefgh")
    a = Partition.from_labels(nodes, [0, 0, 1, 1, 2, 2, 2, 3])
    b = Partition.from_labels(nodes, [1, 1, 1, 0, 0, 2, 2, 2])
    perm = {0: 2, 1: 3, 2: 0, 3: 1}
    a2 = Partition.from_labels(nodes, [perm[x] for x in a.labels()])
    assert nmi(a, b) == pytest.approx(nmi(a2, b))
    assert ari(a, b) == pytest.approx(ari(a2, b))
    assert core_f1(a, b) == core_f1(a2, b)
