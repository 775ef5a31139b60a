#!/usr/bin/env python3
"""Build the held-out evaluation fixture from the People's Daily (Jan 1998)
corpus bundled with the MIT-licensed `snownlp` package (snownlp/tag/199801.txt).

POS tags are stripped, paragraphs are split into sentences after 。！？, the
first 10000 sentences become the training split and the next 1000 the
held-out split.

usage: make_pd1998_fixture.py <path/to/199801.txt> <out-dir>
"""
import os
import sys

TRAIN, HELDOUT = 10000, 1000
ENDERS = {"。", "！", "？"}


def sentences(path):
    with open(path, encoding="utf-8") as f:
        for line in f:
            cur = []
            for tok in line.split():
                cur.append(tok.rsplit("/", 1)[0])
                if cur[-1] in ENDERS:
                    yield cur
                    cur = []
            if cur:
                yield cur


def main():
    src, out = sys.argv[1], sys.argv[2]
    sents = []
    for s in sentences(src):
        sents.append(s)
        if len(sents) == TRAIN + HELDOUT:
            break
    with open(os.path.join(out, "pd1998_train.txt"), "w", encoding="utf-8") as f:
        for s in sents[:TRAIN]:
            f.write(" ".join(s) + "\n")
    with open(os.path.join(out, "pd1998_heldout.txt"), "w", encoding="utf-8") as f:
        for s in sents[TRAIN:]:
            f.write(" ".join(s) + "\n")


if __name__ == "__main__":
    main()
