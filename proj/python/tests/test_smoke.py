import math

import numpy as np
import pytest

import skilllab


def disjoint(n):
    rho = np.zeros((n, 2 * n + 1))
    for z in range(n):
        rho[z, 2 * z : 2 * z + 2] = 0.5
    return rho


@pytest.mark.parametrize("n", [2, 5, 10])
def test_reverse_reward_bounds(n):
    rho = disjoint(n)
    for z in range(n):
        assert skilllab.reverse_reward(rho, 2 * z, z) == pytest.approx(math.log(n), abs=1e-9)
        assert skilllab.reverse_reward(rho, 2 * n, z) == pytest.approx(0.0, abs=1e-12)
    assert skilllab.reverse_reward(rho, 0, 1) == -math.inf
    assert skilllab.reverse_reward(rho, 2 * n, 0, background=True) == -math.inf


def test_forward_matches_reverse_on_random_models():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = rng.random((3, 8)) * (rng.random((3, 8)) < 0.5)
        rho[:, 0] += 0.1
        rho /= rho.sum(axis=1, keepdims=True)
        for s in range(8):
            for z in range(3):
                r = skilllab.reverse_reward(rho, s, z)
                f = skilllab.forward_reward(rho, s, z)
                if math.isinf(r):
                    assert f == r
                else:
                    assert f == pytest.approx(r, abs=1e-9)


def test_posterior_sums_to_one_and_rejects_bad_rows():
    p = skilllab.posterior(disjoint(4), 3)
    assert p.sum() == pytest.approx(1.0)
    assert p[1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        skilllab.posterior(np.full((2, 2), 0.4), 0)
    with pytest.raises(IndexError):
        skilllab.posterior(disjoint(2), 99)


def test_gridworld_export_shape():
    fig = skilllab.gridworld_figure(2, "forward")
    assert fig["form"] == "forward"
    assert len(fig["reward"]) == 2
    assert len(fig["reward"][0]) == fig["rows"]
    best = max(v for row in fig["reward"][0] for v in row if isinstance(v, (int, float)))
    assert best == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        skilllab.gridworld_figure(2, "sideways")


def test_maze_step_and_walls():
    names = skilllab.maze_names()
    assert {"square", "corridor", "bottleneck", "tree"} <= set(names)
    spec = skilllab.maze("square")
    assert spec["width"] == 5
    for name in names:
        assert skilllab.count_free_regions(name) == 1
    pos, t, done = skilllab.step("square", [0.5, 2.5], 0, [0.5, 0.0])
    assert np.allclose(pos, [1.0, 2.5])
    assert t == 1 and not done
    # Moving into the outer boundary stops just short of it.
    pos, _, _ = skilllab.step(spec, [0.1, 0.5], 0, [-0.9, 0.0])
    assert 0 < pos[0] < 1e-3
    with pytest.raises(IndexError):
        skilllab.step("square", [0.5, 0.5], 0, [2.0, 0.0])


def test_sibling_rivalry_and_assignment():
    d = skilllab.sibling_rivalry_select([1, 0], [5, 0], [0, 0], 2.5)
    assert d["admit_a"] and d["admit_b"]
    assert d["bonus"] == pytest.approx(2.5)
    d = skilllab.sibling_rivalry_select([3, 0], [4, 0], [0, 0], 2.5)
    assert not d["admit_a"] and d["admit_b"]
    cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
    assert list(skilllab.optimal_assignment(cost)) == [1, 0, 2]


def test_content_hash_vectors():
    assert skilllab.content_hash("") == "cbf29ce484222325"
    assert skilllab.content_hash("a") == "af63dc4c8601ec8c"


def test_config_round_trip_and_errors():
    c = skilllab.default_config()
    assert c["skills"] == 10
    assert skilllab.validate_config(c) == c
    assert skilllab.default_config(paper_defaults=True)["smm"]["alpha"] == pytest.approx(0.1)
    with pytest.raises(Exception, match="skils"):
        skilllab.validate_config({"skils": 3})
    with pytest.raises(ValueError):
        skilllab.validate_config({"skills": 0})


def test_tiny_run_and_eval(tmp_path):
    out = tmp_path / "edl"
    config = {
        "skills": 3,
        "iterations": 2,
        "seed": 4,
        "out": str(out),
        "eval_rollouts": 2,
        "random_rollouts": 2,
        "landscape_resolution": 6,
        "oracle_samples": 4096,
        "ppo": {"horizon": 100, "batch_size": 50, "epochs": 1},
        "network": {"hidden_units": 8},
        "vqvae": {"hidden_units": 8, "train_steps": 20, "batch_size": 32},
    }
    seen = []
    manifest = skilllab.run(config, seen.append)
    assert [m["iteration"] for m in seen] == [0, 1]
    assert {"config.json", "buffer.json", "codebook.json"} <= set(manifest["artifacts"])
    metrics = skilllab.read_metrics(out)
    assert len(metrics) == 2
    assert metrics[0]["reward_checksum"] == seen[0]["reward_checksum"]
    trajectories = skilllab.load_export(out, "trajectories")
    assert trajectories
    skilllab.evaluate(out, interpolate=(0, 2), steps=3)
    assert len(skilllab.load_export(out, "interpolation")["sets"]) == 3
    with pytest.raises(FileNotFoundError):
        skilllab.load_export(out, "nope")
