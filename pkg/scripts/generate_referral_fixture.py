"""
Generate a synthetic referral corpus for tests and demos.

The corpus has the class balance of the clinic export it stands in for
(2,086 referrals, 235 with a procedure) and short diagnostic texts of
about 12 words. Every positive text carries 3 signal tokens that never
appear in negatives, so a working pipeline separates the classes almost
perfectly and a broken one does not.
"""

import csv
import logging
import sys
from pathlib import Path

import numpy as np

from refertriage.app.core.dataset import CodeDictionary, ReferralDataset, ReferralRecord, write_referrals

logger = logging.getLogger(__name__)

N_TOTAL = 2086
N_POSITIVE = 235
SIGNAL_PER_POSITIVE = 3

BACKGROUND_WORDS = (
    "pain", "knee", "left", "right", "chronic", "swelling", "shoulder", "follow", "visit",
    "stiffness", "mild", "back", "hip", "ankle", "referral", "evaluation", "history", "wrist",
    "elbow", "strain", "sprain", "acute", "bilateral", "lumbar", "cervical", "patient", "reports",
    "worse", "walking", "night", "since", "weeks", "months", "tender", "limited", "motion",
    "physical", "therapy", "imaging", "normal", "exam", "recheck", "joint", "soreness",
)
SIGNAL_WORDS = ("meniscal", "rupture", "displaced", "arthrosis", "impingement", "labral")

CODE_DESCRIPTIONS = {
    "M17.11": "Unilateral primary osteoarthritis, right knee",
    "M17.12": "Unilateral primary osteoarthritis, left knee",
    "M25.561": "Pain in right knee",
    "M25.562": "Pain in left knee",
    "M54.50": "Low back pain, unspecified",
    "M75.101": "Unspecified rotator cuff tear or rupture of right shoulder, not specified as traumatic",
    "S83.241A": "Other tear of medial meniscus, current injury, right knee, initial encounter",
    "M79.671": "Pain in right foot",
    "M25.511": "Pain in right shoulder",
}
UNKNOWN_CODE = "M99.89"


def generate_referral_corpus(
    n_total: int = N_TOTAL,
    n_positive: int = N_POSITIVE,
    seed: int = 0,
    unknown_code_rate: float = 0.02,
) -> ReferralDataset:
    """
    Build the planted-signal corpus.

    Args:
        n_total: Number of referrals
        n_positive: Referrals labelled 1
        seed: Generator seed
        unknown_code_rate: Share of records carrying a code missing from
            the dictionary

    Returns:
        ReferralDataset (not enriched)
    """
    if not 0 < n_positive < n_total:
        raise ValueError(f"n_positive must lie in (0, {n_total}), got {n_positive}")
    rng = np.random.default_rng(seed)
    positive = np.zeros(n_total, dtype=bool)
    positive[rng.choice(n_total, size=n_positive, replace=False)] = True
    codes = list(CODE_DESCRIPTIONS)

    records = []
    for i in range(n_total):
        length = int(rng.integers(10, 15))
        if positive[i]:
            words = list(rng.choice(BACKGROUND_WORDS, size=length - SIGNAL_PER_POSITIVE))
            signal = rng.choice(SIGNAL_WORDS, size=SIGNAL_PER_POSITIVE, replace=False)
            for token in signal:
                words.insert(int(rng.integers(0, len(words) + 1)), str(token))
        else:
            words = list(rng.choice(BACKGROUND_WORDS, size=length))

        record_codes = [codes[j] for j in rng.choice(len(codes), size=int(rng.integers(1, 3)), replace=False)]
        if rng.random() < unknown_code_rate:
            record_codes.append(UNKNOWN_CODE)

        records.append(
            ReferralRecord(
                record_id=f"R{i:05d}",
                diagnosis_text=" ".join(str(w) for w in words),
                icd10_codes=tuple(record_codes),
                label=int(positive[i]),
            )
        )
    return ReferralDataset(records=tuple(records))


def generate_code_dictionary() -> CodeDictionary:
    return CodeDictionary(entries=dict(CODE_DESCRIPTIONS))


def write_code_dictionary(dictionary: CodeDictionary, path: str) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["code", "description"])
        for code, description in dictionary.entries.items():
            writer.writerow([code, description])


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/fixtures")

    corpus = generate_referral_corpus()
    write_referrals(corpus, str(out_dir / "referrals_synthetic.csv"))
    write_code_dictionary(generate_code_dictionary(), str(out_dir / "icd10_dictionary.csv"))
    logger.info("wrote %d referrals (%d positive) to %s", len(corpus), sum(corpus.labels), out_dir)
    print(f"Generated: {out_dir / 'referrals_synthetic.csv'}")
