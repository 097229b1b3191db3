#!/usr/bin/env python3
"""Builds a small synthetic workspace for the CLI walkthrough in README.md.

The corpus is a two-cluster pool of integer-token sentences. The in-domain
cluster walks cyclically over tokens 1..8, so its sentences share unigram
mass and a bigram skeleton; the noise cluster draws tokens 9..31
independently. In-domain pairs use the reversed target as their source,
which separates the clusters on the source/target similarity feature.
Sentences stay inside token ids 1..31 so they double as samples for the
toy language model (vocabulary 32 with id 0 reserved for begin-of-text).

Everything is derived from one seed, so rerunning the script reproduces
the workspace byte for byte.

Usage: make_demo_data.py [--out DIR] [--seed N] [--pool N]
"""

import argparse
import json
import random
from pathlib import Path


def domain_sentence(rng):
    length = rng.randrange(8, 13)
    pos = rng.randrange(8)
    tokens = []
    for _ in range(length):
        tokens.append(1 + pos)
        pos = (pos + (2 if rng.randrange(8) == 0 else 1)) % 8
    return " ".join(map(str, tokens))


def noise_sentence(rng):
    return " ".join(str(rng.randrange(9, 32)) for _ in range(rng.randrange(6, 15)))


def reverse_tokens(sentence):
    return " ".join(reversed(sentence.split()))


def corrupt(sentence, rng, rate):
    tokens = [t if rng.random() > rate else str(rng.randrange(1, 9)) for t in sentence.split()]
    return " ".join(tokens)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo/workspace", help="workspace directory")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--pool", type=int, default=2000, help="corpus pair count")
    parser.add_argument("--in-fraction", type=float, default=0.08)
    parser.add_argument("--experts", type=int, default=64)
    parser.add_argument("--heldout", type=int, default=128)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    in_count = round(args.pool * args.in_fraction)
    in_positions = set(rng.sample(range(args.pool), in_count))
    corpus = []
    for i in range(args.pool):
        if i in in_positions:
            tgt = domain_sentence(rng)
            src = reverse_tokens(tgt)
        else:
            tgt = noise_sentence(rng)
            src = noise_sentence(rng)
        corpus.append({"id": f"p{i:06d}", "src": src, "tgt": tgt})
    write_jsonl(out / "corpus.jsonl", corpus)

    write_jsonl(out / "experts.jsonl",
                [{"id": f"e{i}", "src": "0", "tgt": domain_sentence(rng)}
                 for i in range(args.experts)])
    write_jsonl(out / "heldout.jsonl",
                [{"id": f"h{i}", "src": "1", "tgt": domain_sentence(rng)}
                 for i in range(args.heldout)])

    refs = [domain_sentence(rng) for _ in range(8)]
    for name, rate in (("hyp.txt", 0.1), ("hyp_b.txt", 0.35)):
        lines = [corrupt(ref, rng, rate) for ref in refs]
        (out / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "ref.txt").write_text("\n".join(refs) + "\n", encoding="utf-8")

    config = {
        "seed": args.seed,
        "paths": {
            "corpus": "corpus.jsonl",
            "expert_corpus": "experts.jsonl",
            "embedding_store": "store.bin",
            "output_dir": "out",
        },
        "embedding": {"dim": 16},
        "grpo": {"group_size": 4, "traj_len": 3, "pool_sample": 64, "iterations": 40},
        "curation": {"budget_K": 120},
        "lora": {"epochs": 200, "learning_rate": 0.2},
        "carbon": {"train_hours": 2.0, "num_gpus": 1},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")

    print(f"workspace: {out}")
    print(f"  corpus.jsonl    {args.pool} pairs ({in_count} in-domain)")
    print(f"  experts.jsonl   {args.experts} references")
    print(f"  heldout.jsonl   {args.heldout} evaluation pairs")
    print("  hyp.txt hyp_b.txt ref.txt, config.json")


if __name__ == "__main__":
    main()
