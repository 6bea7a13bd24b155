"""
Attack-candidate ranking for a target post.

Candidates above the similarity floor are ranked twice: by ΔCG descending
(positive-framing extreme) and by ΔCG ascending (negative-framing extreme).
Ties go to the higher similarity, then to the smaller variant id.
"""

from dataclasses import dataclass, field
from typing import List, Sequence

from ..utils.hashing import natural_key
from .affect import score_pair
from .errors import NoCandidates, OutOfRange
from .models import AttackCandidate, StyledVariant, VadVector

MAX_OBJECTIVE = "max_delta_cg"
MIN_OBJECTIVE = "min_delta_cg"


@dataclass(frozen=True)
class CandidateInput:
    """A variant with its VAD point and its similarity to the target post."""
    variant: StyledVariant
    comment_vad: VadVector
    similarity: float


@dataclass
class RankedCandidates:
    """Top-k lists of both objectives."""
    post_id: str
    positive: List[AttackCandidate] = field(default_factory=list)
    negative: List[AttackCandidate] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            MAX_OBJECTIVE: [c.to_dict() for c in self.positive],
            MIN_OBJECTIVE: [c.to_dict() for c in self.negative],
        }


def attack_candidates(
    post_id: str,
    post_vad: VadVector,
    pool: Sequence[CandidateInput],
    k: int,
    similarity_floor: float = 0.0,
) -> RankedCandidates:
    """
    Rank variants for hypothetical injection into the discussion of a post.

    Args:
        post_id: Target post
        post_vad: VAD point of the post
        pool: Candidate variants
        k: List length per objective
        similarity_floor: Minimum variant/post similarity

    Raises:
        OutOfRange: k < 1
        NoCandidates: Nothing reaches the similarity floor
    """
    if k < 1:
        raise OutOfRange(f"k must be >= 1, got {k}")
    scored = []
    for item in pool:
        if item.similarity < similarity_floor:
            continue
        record = score_pair(item.variant.variant_id, post_id, item.variant.style, post_vad, item.comment_vad)
        scored.append((item, record))
    if not scored:
        raise NoCandidates(f"No variant reaches similarity {similarity_floor} with post {post_id}")

    def ranked(key, objective: str) -> List[AttackCandidate]:
        ordered = sorted(scored, key=key)[:k]
        return [
            AttackCandidate(
                post_id=post_id,
                variant=item.variant,
                similarity=item.similarity,
                cg_comment=record.cg_comment,
                delta_cg=record.delta_cg,
                framing=record.framing,
                rank=rank,
                objective=objective,
            )
            for rank, (item, record) in enumerate(ordered, start=1)
        ]

    return RankedCandidates(
        post_id=post_id,
        positive=ranked(
            lambda s: (-s[1].delta_cg, -s[0].similarity, natural_key(s[0].variant.variant_id)), MAX_OBJECTIVE
        ),
        negative=ranked(
            lambda s: (s[1].delta_cg, -s[0].similarity, natural_key(s[0].variant.variant_id)), MIN_OBJECTIVE
        ),
    )
