"""End-to-end checks of the python bindings against independent
implementations: a from-scratch embedding reimplementation, the standalone
reference BLEU scorer, and scipy's paired t-test."""

import importlib.util
import json
import math
import random
from pathlib import Path

import pytest

try:
    import _sage as sage
except ImportError:  # installed package layout
    from sage_curation import _sage as sage

DATA = Path(__file__).resolve().parents[1] / "data"

_spec = importlib.util.spec_from_file_location("reference_bleu", DATA / "reference_bleu.py")
reference_bleu = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(reference_bleu)


# --- independent embedding reimplementation (ASCII inputs only) ------------

FNV_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x00000100000001B3
MASK = (1 << 64) - 1


def fnv1a64(data, h=FNV_BASIS):
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK
    return h


def hash_embed_reference(text, dim, seed):
    tokens = text.lower().split()
    features = list(tokens)
    features += [a + "\x1f" + b for a, b in zip(tokens, tokens[1:])]
    acc = [0.0] * dim
    seeded = fnv1a64(seed.to_bytes(8, "little"))
    for feature in features:
        h = fnv1a64(feature.encode(), seeded)
        acc[h % dim] += -1.0 if h >> 63 else 1.0
    norm = math.sqrt(sum(x * x for x in acc))
    return [x / norm for x in acc]


FROZEN_FOX = [
    -0.4472135954999579, 0.0, 0.0, 0.4472135954999579,
    0.0, 0.4472135954999579, -0.4472135954999579, 0.4472135954999579,
]


def test_frozen_embedding_vector():
    assert sage.hash_embed("the quick brown fox", 8, 0) == pytest.approx(
        FROZEN_FOX, abs=1e-15
    )


def test_embedding_matches_independent_reimplementation():
    cases = [
        ("the quick brown fox", 8, 0),
        ("jumps over the lazy dog", 16, 7),
        ("a b a b a", 4, 123),
        ("Tabs\tand   runs of spaces collapse", 32, 2024),
    ]
    for text, dim, seed in cases:
        ours = hash_embed_reference(text, dim, seed)
        theirs = sage.hash_embed(text, dim, seed)
        assert theirs == pytest.approx(ours, abs=1e-15)
        assert math.fsum(x * x for x in theirs) == pytest.approx(1.0, abs=1e-12)


def test_embedding_case_and_whitespace_insensitive():
    base = sage.hash_embed("hello world", 8, 1)
    assert sage.hash_embed("HELLO   World", 8, 1) == pytest.approx(base, abs=0)


# --- BLEU vs the standalone reference scorer --------------------------------

def test_bleu_matches_reference_on_random_segments():
    rng = random.Random(99)
    vocab = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta"]
    hyps, refs = [], []
    for _ in range(40):
        ref = [rng.choice(vocab) for _ in range(rng.randint(5, 14))]
        hyp = [w if rng.random() < 0.8 else rng.choice(vocab) for w in ref]
        if rng.random() < 0.3:
            hyp = hyp[:-1]
        refs.append(" ".join(ref))
        hyps.append(" ".join(hyp))

    expected = reference_bleu.corpus_bleu(hyps, refs)
    got = sage.bleu_corpus([h.split() for h in hyps], [r.split() for r in refs])
    assert got["score"] == pytest.approx(expected, abs=1e-9)


def test_bleu_frozen_fixture_matches_golden():
    golden = json.loads((DATA / "bleu50" / "golden.json").read_text())
    hyp_lines = reference_bleu.read_lines(DATA / "bleu50" / "hyp.txt")
    ref_lines = reference_bleu.read_lines(DATA / "bleu50" / "ref.txt")
    assert len(hyp_lines) == golden["segments"]

    rescored = reference_bleu.corpus_bleu(hyp_lines, ref_lines)
    assert rescored == pytest.approx(golden["score"], abs=1e-12)

    hyps = [sage.tokenize_for_bleu(line) for line in hyp_lines]
    refs = [sage.tokenize_for_bleu(line) for line in ref_lines]
    assert sage.bleu_corpus(hyps, refs)["score"] == pytest.approx(
        golden["score"], abs=0.01
    )


def test_bleu_identity_and_clipping():
    tokens = "the cat sat on the mat".split()
    assert sage.bleu_segment(tokens, tokens)["score"] == 100.0
    clipped = sage.bleu_segment("the the the the".split(), "the cat".split())
    assert clipped["precisions"][0] == pytest.approx(0.25)
    assert clipped["score"] == 0.0


# --- paired t-test vs scipy -------------------------------------------------

def test_paired_t_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = random.Random(7)
    a = [rng.gauss(0.5, 1.0) for _ in range(25)]
    b = [rng.gauss(0.3, 1.2) for _ in range(25)]
    ours = sage.paired_t_test(a, b)
    theirs = stats.ttest_rel(a, b)
    assert ours["t_stat"] == pytest.approx(theirs.statistic, abs=1e-10)
    assert ours["p_two_tailed"] == pytest.approx(theirs.pvalue, abs=1e-10)
    assert ours["df"] == 24


def test_paired_t_fixture():
    result = sage.paired_t_test([2.0, 4.0, 6.0], [1.0, 2.0, 3.0])
    assert result["t_stat"] == pytest.approx(2.0 * math.sqrt(3.0), abs=1e-12)
    assert result["p_two_tailed"] == pytest.approx(0.07417990022744855, abs=1e-9)


def test_incomplete_beta_matches_scipy():
    special = pytest.importorskip("scipy.special")
    rng = random.Random(11)
    for _ in range(50):
        a = rng.uniform(0.5, 6.0)
        b = rng.uniform(0.5, 6.0)
        x = rng.random()
        assert sage.regularized_incomplete_beta(a, b, x) == pytest.approx(
            special.betainc(a, b, x), abs=1e-9
        )


# --- smaller anchors and error mapping --------------------------------------

def test_pair_loss_anchors():
    assert sage.pair_loss(0.0, 4.2) == pytest.approx(math.log(2.0), abs=1e-15)
    assert sage.pair_loss(123.0, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert sage.pair_loss(1.0, 1.0) == pytest.approx(0.31326168751822286, abs=1e-15)


def test_emissions_anchor():
    report = sage.estimate_emissions(train_hours=55.0, num_gpus=8)
    assert report["p_sys_kw"] == pytest.approx(3.52, abs=1e-12)
    assert report["energy_kwh"] == pytest.approx(212.96, abs=1e-9)
    assert report["co2_kg"] == pytest.approx(101.156, abs=1e-9)
    assert sage.format_reduction(sage.percent_reduction(85.6, 4.2)) == "95.1"


def test_topk_tiebreak_is_id_ascending():
    scored = [("d", 0.5), ("b", 0.5), ("a", 0.25), ("c", 0.5)]
    assert sage.topk_select(scored, 3) == ["b", "c", "d"]


def test_reward_matches_mean_cosine():
    experts = [[1.0, 0.0], [0.0, 1.0]]
    ref = sage.build_expert_reference(experts)
    assert ref.expert_count == 2
    reward = sage.semantic_reward([1.0, 0.0], ref)
    assert reward == pytest.approx(0.5, abs=1e-15)


def test_lora_merge_equals_forward():
    layer = sage.LoraLayer([[1.0, 0.0], [0.0, 1.0]], rank=1, alpha=2.0)
    layer.a = [[1.0, 1.0]]
    layer.b = [[1.0], [0.0]]
    x = [1.0, 1.0]
    merged = layer.merge()
    via_merge = [sum(m * v for m, v in zip(row, x)) for row in merged]
    assert layer.forward(x) == pytest.approx(via_merge, abs=1e-15)
    assert layer.forward(x) == pytest.approx([5.0, 1.0], abs=1e-15)
    assert layer.adapter_params == 4
    assert layer.base_params == 4


def test_error_mapping():
    with pytest.raises(ValueError):
        sage.hash_embed("hello", 1, 0)  # dimension too small: config error
    with pytest.raises(RuntimeError):
        sage.hash_embed("   ", 8, 0)  # blank text: data error
    ref = sage.build_expert_reference([[1.0, 0.0]])
    with pytest.raises(RuntimeError):
        sage.semantic_reward([1.0, 0.0, 0.0], ref)  # dimension mismatch
