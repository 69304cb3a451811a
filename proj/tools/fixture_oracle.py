#!/usr/bin/env python3
"""Independent oracle for the e2e fixture's retrieval runs.

Reads the committed fixture files directly (binary image embeddings via
struct, text embeddings from JSONL, enhancement replies from the cache) and
writes expected.json with per-run gold ranks and metric strings.

    python3 tools/fixture_oracle.py tests/fixtures/e2e
"""
import hashlib
import json
import struct
import sys
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from pathlib import Path

import numpy as np

MODEL = "clip-l"


def load_binary(path):
    data = path.read_bytes()
    assert data[:8] == b"VWSDEMB1"
    pos, out = 8, {}
    while pos < len(data):
        (klen,) = struct.unpack_from("<H", data, pos); pos += 2
        key = data[pos:pos + klen].decode(); pos += klen
        pos += 1  # kind
        (mlen,) = struct.unpack_from("<H", data, pos); pos += 2
        model = data[pos:pos + mlen].decode(); pos += mlen
        (dim,) = struct.unpack_from("<I", data, pos); pos += 4
        vec = np.array(struct.unpack_from("<%df" % dim, data, pos), dtype=np.float64); pos += 4 * dim
        out[(model, key)] = vec
    return out


def load_jsonl(path):
    out = {}
    for line in path.read_text().splitlines():
        if line.strip():
            r = json.loads(line)
            out[(r["model"], r["key"])] = np.array(np.float32(r["vector"]), dtype=np.float64)
    return out


def text_key(text):
    return hashlib.sha256(" ".join(text.split()).encode()).hexdigest() + ":" + MODEL


def percent(value):
    """Fraction in [0, 1] as a percentage string, halves rounded up."""
    return str((Decimal(value.numerator) * 100 / Decimal(value.denominator))
               .quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def rank(phrase_vec, cands, vectors, penalty):
    scored = []
    for idx, c in enumerate(cands):
        v = vectors[(MODEL, c)]
        sim = float(phrase_vec @ v / (np.linalg.norm(phrase_vec) * np.linalg.norm(v)))
        scored.append((-(sim - penalty.get(c, 0.0)), idx, c))
    return [c for _, _, c in sorted(scored)]


def run(instances, phrases, vectors, lam):
    plain = [rank(vectors[(MODEL, text_key(p))], inst["cands"], vectors, {}) for inst, p in zip(instances, phrases)]
    ranked = plain
    if lam is not None:
        counts = {}
        for r in plain:
            counts[r[0]] = counts.get(r[0], 0) + 1
        penalty = {c: lam * n / len(plain) for c, n in counts.items()}
        ranked = [rank(vectors[(MODEL, text_key(p))], inst["cands"], vectors, penalty)
                  for inst, p in zip(instances, phrases)]
    ranks = [r.index(inst["gold"]) + 1 for r, inst in zip(ranked, instances)]
    hits = sum(1 for g in ranks if g == 1)
    rr = sum(Fraction(1, g) for g in ranks)
    return {
        "gold_ranks": ranks,
        "accuracy": percent(Fraction(hits, len(ranks))),
        "mrr": percent(rr / len(ranks)),
    }


def main():
    root = Path(sys.argv[1])
    rows = [l.split("\t") for l in (root / "data.tsv").read_text().splitlines()]
    golds = (root / "gold.txt").read_text().splitlines()
    instances = [{"phrase": r[1], "cands": r[2:12], "gold": g} for r, g in zip(rows, golds)]

    vectors = load_binary(root / "images.bin")
    vectors.update(load_jsonl(root / "text.jsonl"))

    knowledge = {}
    for f in (root / "cache").rglob("*.json"):
        entry = json.loads(f.read_text())
        prompt = entry["request"]["messages"][-1]["content"]
        if prompt.startswith("What is the meaning of "):
            knowledge[prompt[len("What is the meaning of "):-1]] = entry["response"]["text"]

    original = [i["phrase"] for i in instances]
    enhanced = [(p + " " + " ".join(knowledge[p].split())).strip() for p in original]

    expected = {
        "baseline": run(instances, original, vectors, None),
        "penalty": run(instances, original, vectors, 1.0),
        "enhanced": run(instances, enhanced, vectors, None),
        "enhanced_penalty": run(instances, enhanced, vectors, 1.0),
    }
    (root / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")


if __name__ == "__main__":
    main()
