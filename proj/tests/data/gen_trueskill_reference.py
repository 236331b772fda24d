"""Regenerates trueskill_reference.json with the `trueskill` package."""

import json
import random
import sys

import trueskill


def main(path):
    rng = random.Random(20240611)
    env = trueskill.TrueSkill(draw_probability=0.0, backend="mpmath")
    cases = []
    for _ in range(100):
        k = rng.randint(3, 5)
        groups = [f"g{i}" for i in range(k)]
        dominant = rng.choice(groups)
        rankings = []
        for _ in range(rng.randint(3, 15)):
            rest = [g for g in groups if g != dominant]
            rng.shuffle(rest)
            rankings.append([dominant] + rest)
        ratings = {g: env.create_rating() for g in groups}
        for order in rankings:
            rated = env.rate([(ratings[g],) for g in order], ranks=list(range(len(order))))
            for g, (r,) in zip(order, rated):
                ratings[g] = r
        cases.append({
            "rankings": rankings,
            "dominant": dominant,
            "ratings": {g: [r.mu, r.sigma] for g, r in sorted(ratings.items())},
        })
    with open(path, "w") as f:
        json.dump({"trueskill_version": trueskill.__version__, "cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "trueskill_reference.json")
