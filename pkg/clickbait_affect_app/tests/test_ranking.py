"""
Tests for attack-candidate ranking.
"""

import unittest

from clickbait_affect_app.core.errors import NoCandidates, OutOfRange
from clickbait_affect_app.core.models import DecodeParams, Framing, StyledVariant, VadVector
from clickbait_affect_app.core.ranking import MAX_OBJECTIVE, MIN_OBJECTIVE, CandidateInput, attack_candidates

POST_VAD = VadVector(0.5, 0.5, 0.5)  # CG 0.75


def candidate(variant_id, vad, similarity, style="formal"):
    variant = StyledVariant(
        variant_id=variant_id,
        source_pair_id=variant_id.rsplit(":", 1)[0],
        style=style,
        text=f"text of {variant_id}",
        raw_text=f"text of {variant_id}",
        backend_id="test",
        model_id="test",
        decode_params=DecodeParams(),
        prompt_hash="0" * 64,
        template_version="t",
        created_at="",
    )
    return CandidateInput(variant=variant, comment_vad=vad, similarity=similarity)


class TestAttackCandidates(unittest.TestCase):
    """Tests for attack_candidates."""

    def setUp(self):
        self.pool = [
            candidate("h1:p1:formal", VadVector(0.0, 0.0, 1.0), 0.6),        # ΔCG +0.75
            candidate("h2:p2:clickbait", VadVector(1.0, 1.0, 0.0), 0.7),     # ΔCG -1.25
            candidate("h3:p3:neutral", VadVector(0.5, 0.5, 0.5), 0.4),       # ΔCG 0
            candidate("h10:p4:humor", VadVector(0.5, 0.5, 0.5), 0.9),        # ΔCG 0, more similar
            candidate("h4:p5:casual", VadVector(0.0, 0.0, 0.0), 0.05),       # below floor
        ]

    def test_both_objectives(self):
        ranked = attack_candidates("p1", POST_VAD, self.pool, k=2, similarity_floor=0.1)
        self.assertEqual([c.variant.variant_id for c in ranked.positive], ["h1:p1:formal", "h10:p4:humor"])
        self.assertEqual([c.variant.variant_id for c in ranked.negative], ["h2:p2:clickbait", "h10:p4:humor"])
        self.assertAlmostEqual(ranked.positive[0].delta_cg, 0.75)
        self.assertAlmostEqual(ranked.negative[0].delta_cg, -1.25)
        self.assertEqual(ranked.negative[0].framing, Framing.NEGATIVE)
        self.assertEqual([c.rank for c in ranked.positive], [1, 2])
        self.assertEqual(ranked.positive[0].objective, MAX_OBJECTIVE)
        self.assertEqual(ranked.negative[0].objective, MIN_OBJECTIVE)

    def test_similarity_tie_then_id(self):
        pool = [
            candidate("h10:p1:formal", VadVector(0.5, 0.5, 0.5), 0.5),
            candidate("h2:p1:formal", VadVector(0.5, 0.5, 0.5), 0.5),
        ]
        ranked = attack_candidates("p1", POST_VAD, pool, k=2)
        self.assertEqual([c.variant.variant_id for c in ranked.positive], ["h2:p1:formal", "h10:p1:formal"])

    def test_floor_excludes_candidates(self):
        ranked = attack_candidates("p1", POST_VAD, self.pool, k=10, similarity_floor=0.1)
        ids = {c.variant.variant_id for c in ranked.positive}
        self.assertNotIn("h4:p5:casual", ids)
        self.assertEqual(len(ranked.positive), 4)

    def test_nothing_above_floor(self):
        with self.assertRaises(NoCandidates):
            attack_candidates("p1", POST_VAD, self.pool, k=3, similarity_floor=0.95)

    def test_invalid_k(self):
        with self.assertRaises(OutOfRange):
            attack_candidates("p1", POST_VAD, self.pool, k=0)

    def test_to_dict(self):
        data = attack_candidates("p1", POST_VAD, self.pool, k=1).to_dict()
        self.assertEqual(data["post_id"], "p1")
        self.assertEqual(len(data[MAX_OBJECTIVE]), 1)
        self.assertEqual(data[MIN_OBJECTIVE][0]["variant_id"], "h2:p2:clickbait")


if __name__ == '__main__':
    unittest.main()
