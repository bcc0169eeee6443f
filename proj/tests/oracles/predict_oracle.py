#!/usr/bin/env python3
"""Recounts predictor statistics from an event log and a ratings file.

Reads the JSON-lines event log and ratings directly (no shared code with the
C++ library) and prints the expected summary as JSON.

usage: predict_oracle.py EVENTS RATINGS [--epsilon E] [--gap G]
"""

import argparse
import json


def load_matches(path):
    matches = {}
    order = []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            j = json.loads(line)
            if j["kind"] == "match":
                j["players"] = {j["home_team_id"]: [], j["away_team_id"]: []}
                matches[j["match_id"]] = j
                order.append(j["match_id"])
            elif j["kind"] == "appearance":
                team = matches[j["match_id"]]["players"][j["team_id"]]
                if j["player_id"] not in team:
                    team.append(j["player_id"])
    return [matches[m] for m in order]


def load_ratings(path):
    out = {}
    with open(path) as f:
        for line in f:
            if line.strip():
                j = json.loads(line)
                out[j["player_id"]] = j
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("events")
    ap.add_argument("ratings")
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--gap", type=float, default=0.2)
    args = ap.parse_args()

    ratings = load_ratings(args.ratings)
    evaluated = skipped = successes = qualifying = upsets = spread = 0
    for m in load_matches(args.events):
        q = []
        for team in (m["home_team_id"], m["away_team_id"]):
            values = []
            for p in m["players"][team]:
                r = ratings.get(p)
                if r is None or m["season_id"] in r["season_ids"]:
                    values = None
                    break
                values.append(r["rating"])
            if not values:
                q = None
                break
            total = 0.0
            for v in values:  # left-to-right, like the library
                total += v
            q.append(total / len(values))
        if q is None:
            skipped += 1
            continue
        evaluated += 1
        dq = q[0] - q[1]
        dg = m["goals_home"] - m["goals_away"]
        if abs(dq) < args.epsilon:
            successes += dg == 0
            spread = max(spread, abs(dg))
        elif (dq > 0 and dg > 0) or (dq < 0 and dg < 0):
            successes += 1
        if abs(dq) > args.gap:
            qualifying += 1
            upsets += (dq > 0 and dg < 0) or (dq < 0 and dg > 0)

    print(json.dumps({
        "success_pct": 100.0 * successes / evaluated,
        "evaluated": evaluated,
        "skipped": skipped,
        "upset_rate": upsets / qualifying if qualifying else None,
        "similar_goal_spread": spread,
    }, indent=2))


if __name__ == "__main__":
    main()
