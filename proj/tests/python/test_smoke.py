import math

import pytest

import squadforge as sf


def record(position, minutes, **stats):
    r = {
        "player_id": "p1", "gameweek": 5, "position": position, "team_id": "t1",
        "minutes": minutes, "goals": 0, "assists": 0, "saves": 0, "bonus": 0,
        "yellow_cards": 0, "red_cards": 0, "own_goals": 0, "penalties_missed": 0,
        "penalties_saved": 0, "goals_conceded": 0, "clean_sheet": False,
        "influence": 0.0, "creativity": 0.0, "threat": 0.0, "total_points": 0,
        "was_home": True, "opponent_team_id": "t2", "cost": 5.0, "availability": "available",
    }
    r.update(stats)
    return r


def test_normalize_market():
    out = sf.normalize_market([("home", 1.5), ("draw", 4.0), ("away", 6.0)])
    p = out["probabilities"]
    assert math.isclose(sum(p.values()), 1.0, abs_tol=1e-12)
    assert math.isclose(p["home"], (1 / 1.5) / (1 / 1.5 + 1 / 4 + 1 / 6), rel_tol=1e-12)
    assert math.isclose(out["overround"], 1 / 1.5 + 1 / 4 + 1 / 6 - 1, rel_tol=1e-12)


def test_bad_odds_raise_library_error():
    with pytest.raises(sf.SquadforgeError, match="^domain: "):
        sf.normalize_market([("home", 0.5), ("away", 2.0)])


def test_score_player():
    assert sf.score_player(record("FWD", 90, goals=2, assists=1)) == 13
    assert sf.score_player(record("GK", 90, clean_sheet=True, saves=3)) == 7
    assert sf.score_player(record("DEF", 30, goals_conceded=2, yellow_cards=1)) == -1
    assert sf.label_captain(7) == 1 and sf.label_captain(6) == 0


def test_auc_and_precision():
    assert sf.auc_roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    assert sf.precision_at([0.9, 0.6, 0.2], [1, 0, 1]) == pytest.approx(0.5)


def test_select_lineup():
    pool = []
    for pos, n in [("GK", 2), ("DEF", 5), ("MID", 5), ("FWD", 3)]:
        for i in range(n):
            pool.append({"player_id": f"{pos}{i}", "position": pos, "team_id": f"c{len(pool) % 6}",
                         "predicted_score": float(len(pool)), "cost": 5.0})
    lineup = sf.select_lineup(pool)
    assert len(lineup["players"]) == 11
    assert lineup["captain"] == "FWD2"


def test_fit_predict_roundtrip():
    rows = [[float(i % 10), None if i % 7 == 0 else float(i % 3)] for i in range(200)]
    labels = [1 if r[0] >= 7 else 0 for r in rows]
    model = sf.fit(rows, labels, n_trees=30, max_depth=2, learning_rate=0.3)
    assert model.n_trees == 30
    probs = model.predict_proba(rows)
    assert sf.auc_roc(probs, labels) > 0.95
    again = sf.Model.from_json(model.to_json())
    assert again.predict_proba(rows) == probs
    assert len(model.importance()) >= 1


def test_replay_synthetic(tmp_path):
    first = sf.replay_synthetic(seed=3, gameweeks=5, n_trees=20, workdir=str(tmp_path / "a"))
    second = sf.replay_synthetic(seed=3, gameweeks=5, n_trees=20, workdir=str(tmp_path / "b"))
    assert first == second
    assert len(first) == 2
    for series in first.values():
        assert len(series["points"]) == 3
        assert series["total_points"] == sum(series["points"])


def test_run_cli():
    code, out, err = sf.run_cli(["synth", "--help"])
    assert code == 0 and "--seed" in out
    code, _, err = sf.run_cli(["frobnicate"])
    assert code == 2 and err.startswith("error: usage:")
