#!/usr/bin/env python3
"""Writes a seeded 1000-record JSONL embedding file for load tests.

    python3 tools/make_embedding_fixture.py tests/fixtures/embeddings_1000.jsonl
"""
import json
import random
import sys

rng = random.Random(1000)
with open(sys.argv[1], "w") as out:
    for n in range(1000):
        vec = [round(rng.uniform(-1.0, 1.0), 4) for _ in range(4)]
        out.write(json.dumps({"key": "image.%d.jpg" % n, "kind": "image", "model": "clip-laion", "dim": 4,
                              "vector": vec}, separators=(",", ":")) + "\n")
