"""Offline search for short exploration sequences certified by exhaustive enumeration.

Usage: python3 tools/find_uxs.py N [--seed S] [--out FILE]
"""
import argparse
import random

from pebblex.generators import all_port_labeled_graphs
from pebblex.uxs import BRUTE_FORCE, Certificate, ExplorationSequence, covers, format_sequence, verify_universal


def universal(graphs, offsets):
    return all(covers(g, s, offsets) for g in graphs for s in g.nodes)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("n", type=int)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out")
    args = ap.parse_args()
    n, rng = args.n, random.Random(args.seed)
    graphs = list(all_port_labeled_graphs(n, 2))
    length = 1
    while True:
        found = None
        for _ in range(300):
            cand = [rng.randrange(max(1, n - 1)) for _ in range(length)]
            if universal(graphs, cand):
                found = cand
                break
        if found:
            break
        length += 1
    # drop entries greedily while universality survives
    i = 0
    while i < len(found):
        trial = found[:i] + found[i + 1 :]
        if trial and universal(graphs, trial):
            found = trial
        else:
            i += 1
    seq = ExplorationSequence(n, tuple(found), Certificate(BRUTE_FORCE, n_max=n, seed=args.seed))
    assert verify_universal(seq.offsets, n).ok
    text = format_sequence(seq)
    if args.out:
        open(args.out, "w").write(text)
    print(text, end="")


if __name__ == "__main__":
    main()
