#!/usr/bin/env python3
"""Independent corpus BLEU scorer used to cross-check the C++ implementation.

Implements the standard corpus-level BLEU-4 definition directly from the
textbook formula: clipped n-gram precision pooled over segments for
n = 1..4, geometric mean, and the brevity penalty exp(1 - r/c) applied
when the hypothesis corpus is no longer than the reference corpus.

The fixture under bleu50/ is pre-tokenized (tokens separated by single
spaces), so tokenization here is plain whitespace splitting and stays
deliberately decoupled from the library's tokenizer.

Usage: reference_bleu.py HYP_FILE REF_FILE
Prints the score on stdout with full double precision.
"""

import math
import sys
from collections import Counter

MAX_ORDER = 4


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hyp_lines, ref_lines):
    if len(hyp_lines) != len(ref_lines):
        raise ValueError("hypothesis/reference line counts differ")
    if not hyp_lines:
        raise ValueError("no segments")

    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp_line, ref_line in zip(hyp_lines, ref_lines):
        hyp = hyp_line.split()
        ref = ref_line.split()
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = ngrams(hyp, n)
            ref_counts = ngrams(ref, n)
            matches[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
            totals[n - 1] += max(len(hyp) - n + 1, 0)

    if any(m == 0 for m in matches):
        return 0.0

    log_precision = sum(
        math.log(m / t) for m, t in zip(matches, totals)
    ) / MAX_ORDER
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision)


def read_lines(path):
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    score = corpus_bleu(read_lines(argv[1]), read_lines(argv[2]))
    print(repr(score))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
