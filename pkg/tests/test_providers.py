import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from govmine.providers.embedding import DEFAULT_DIM, EmbeddingVector, HashEmbedder, tokenize
from govmine.providers.pairscore import FallbackPairScorer, PairScore, cosine_to_unit, score_pair

WORDS = st.sampled_from(
    "vote release board notice email member hour wait send commit "
    "merge review patch branch issue tracker list thread reply".split()
)
TEXTS = st.lists(WORDS, min_size=1, max_size=12).map(" ".join)


class TestHashEmbedder:
    def test_identical_strings_identical_vectors(self):
        e = HashEmbedder()
        a = e.embed_one("release the vote")
        b = e.embed_one("release the vote")
        assert a.values.tobytes() == b.values.tobytes()
        assert a.cosine(b) == pytest.approx(1.0)

    def test_configured_dimension(self):
        assert HashEmbedder(dim=64).embed_one("x").dim == 64
        assert HashEmbedder().embed_one("x").dim == DEFAULT_DIM

    def test_unit_norm(self):
        v = HashEmbedder().embed_one("the quick brown fox")
        assert abs(v.norm - 1.0) < 1e-9

    def test_semantic_ordering(self):
        e = HashEmbedder()
        base = e.embed_one("release the vote")
        near = e.embed_one("vote on the release")
        far = e.embed_one("kernel panic trace")
        assert base.cosine(near) > base.cosine(far)

    def test_empty_text_error(self):
        with pytest.raises(ValueError):
            HashEmbedder().embed_one("")
        with pytest.raises(ValueError):
            HashEmbedder().embed_one("   ")

    def test_seed_changes_vectors(self):
        a = HashEmbedder(seed=0).embed_one("release vote")
        b = HashEmbedder(seed=1).embed_one("release vote")
        assert a.values.tobytes() != b.values.tobytes()

    @given(TEXTS)
    @settings(max_examples=50)
    def test_batch_matches_single(self, text):
        e = HashEmbedder()
        (batch,) = e.embed_batch([text])
        assert batch.values.tobytes() == e.embed_one(text).values.tobytes()

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingVector(np.array([1.0, np.inf]))


class TestFallbackPairScorer:
    def test_self_similarity(self):
        s = FallbackPairScorer()
        assert s.score_one("we must vote", "we must vote") == pytest.approx(1.0)

    def test_token_disjoint_maps_to_midpoint(self):
        s = FallbackPairScorer()
        assert s.score_one("alpha beta gamma", "delta epsilon zeta") == pytest.approx(0.5)

    @given(TEXTS, TEXTS)
    @settings(max_examples=60)
    def test_symmetry_and_bounds(self, a, b):
        s = FallbackPairScorer()
        ab = s.score_one(a, b)
        assert 0.0 <= ab <= 1.0
        assert ab == pytest.approx(s.score_one(b, a))

    @given(
        st.lists(WORDS, min_size=1, max_size=8, unique=True),
        st.lists(WORDS, min_size=1, max_size=8, unique=True),
    )
    @settings(max_examples=80)
    def test_monotone_shared_token(self, xs, ys):
        # adding a token shared by both strings never decreases the score
        s = FallbackPairScorer()
        before = s.score_one(" ".join(xs), " ".join(ys))
        fresh = "zygomorphic"
        after = s.score_one(" ".join(xs + [fresh]), " ".join(ys + [fresh]))
        assert after >= before - 1e-12

    def test_score_pair_record(self):
        rec = score_pair("vote now", "vote later", FallbackPairScorer(), "a1", "r1")
        assert isinstance(rec, PairScore)
        assert rec.a_id == "a1" and rec.b_id == "r1"
        assert 0.0 <= rec.score <= 1.0

    def test_pairscore_bounds_enforced(self):
        with pytest.raises(ValueError):
            PairScore(a_id="a", b_id="b", score=1.5)


def test_cosine_to_unit_clamps():
    assert cosine_to_unit(1.0) == 1.0
    assert cosine_to_unit(-1.0) == 0.0
    assert cosine_to_unit(0.0) == 0.5
    assert cosine_to_unit(1.0000001) == 1.0


def test_tokenize_lowercases_and_splits():
    assert tokenize("Vote NOW, please!") == ["vote", "now", "please"]
