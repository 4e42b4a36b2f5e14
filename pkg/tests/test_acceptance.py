"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints one [ACCEPTANCE] line (visible with -s); pytest -v shows the
per-criterion pass/fail line either way. The training pipeline (criterion 3)
is module-scoped so the benchmark (criterion 8) reuses its model.
"""
import dataclasses
import math
import time

import numpy as np
import pytest

from conftest import random_state
from test_decisioning import oracle_grow, oracle_signature, random_table, tree_signature
from test_motion import oracle_simulate_pass, random_pass, results_agree
from test_strategies import halfplane_voronoi_vertices, match_vertex_sets, random_sites

from tactic2d.config import DEFAULT_CONFIG
from tactic2d.decisioning import build_root, grow_tree
from tactic2d.extractor import build_dataset, split_dataset
from tactic2d.harness import ScenarioConfig, bench, generate_states
from tactic2d.motion import simulate_pass
from tactic2d.positioning import choose_position, evaluate_candidates, generate_candidates
from tactic2d.predictor import (
    HeuristicPredictor,
    MlpPredictor,
    TabulatedPredictor,
    TrainConfig,
    forward,
    init,
    loss_and_gradients,
    train,
)
from tactic2d.strategies import voronoi_diagram
from tactic2d.world import Vec2

CFG = DEFAULT_CONFIG

TRAIN_STATES = 50_000
TRAIN_SEED = 11
SPLIT_SEED = 3
MODEL_SEED = 5
BENCH_EPISODES = 500
BENCH_SEED = 42


def report(criterion: int, name: str, detail: str = ""):
    print(f"[ACCEPTANCE] criterion {criterion} ({name}): PASS {detail}".rstrip())


# --- criterion 1: gradient correctness on the full model -----------------------
#
# Batched central differences: for every parameter of layer l the network up
# to layer l is fixed, so perturbed pre-activations for thousands of
# parameters propagate through the remaining layers as one big matrix. Only
# forward arithmetic is used; no backprop code is shared with the check.


def _fd_forward_parts(model, x):
    pre = []
    inputs = []
    h = x
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(h)
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if l < last else z
    return inputs, pre


def _fd_losses_from_pre(model, layer, z_block, y):
    """Mean cross-entropy per perturbation from perturbed pre-activations."""
    n_layers = len(model.weights)
    perturbations, batch, _ = z_block.shape
    h = np.maximum(z_block, 0.0) if layer < n_layers - 1 else z_block
    h = h.reshape(perturbations * batch, -1)
    for nxt in range(layer + 1, n_layers):
        h = h @ model.weights[nxt] + model.biases[nxt]
        if nxt < n_layers - 1:
            h = np.maximum(h, 0.0)
    logits = h.reshape(perturbations, batch, -1)
    shifted = logits - logits.max(axis=2, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=2))
    picked = shifted[:, np.arange(batch), y] - log_z
    return -picked.mean(axis=1)


def batched_fd_gradients(model, x, y, eps=1e-4, chunk=4096):
    inputs, pre = _fd_forward_parts(model, x)
    grads_w = []
    grads_b = []
    for l, w in enumerate(model.weights):
        d_in, d_out = w.shape
        flat = np.empty(d_in * d_out)
        for start in range(0, d_in * d_out, chunk):
            idx = np.arange(start, min(start + chunk, d_in * d_out))
            rows, cols = idx // d_out, idx % d_out
            bump = eps * inputs[l][:, rows].T  # (P, batch)
            block = np.repeat(pre[l][None, :, :], len(idx), axis=0)
            block[np.arange(len(idx)), :, cols] += bump
            up = _fd_losses_from_pre(model, l, block, y)
            block[np.arange(len(idx)), :, cols] -= 2.0 * bump
            down = _fd_losses_from_pre(model, l, block, y)
            flat[idx] = (up - down) / (2.0 * eps)
        grads_w.append(flat.reshape(d_in, d_out))

        d = model.biases[l].shape[0]
        block = np.repeat(pre[l][None, :, :], d, axis=0)
        block[np.arange(d), :, np.arange(d)] += eps
        up = _fd_losses_from_pre(model, l, block, y)
        block[np.arange(d), :, np.arange(d)] -= 2.0 * eps
        down = _fd_losses_from_pre(model, l, block, y)
        grads_b.append((up - down) / (2.0 * eps))
    return grads_w, grads_b


def _kink_safe_batch(rng, model, eps):
    """Random batch whose hidden pre-activations all sit farther from the
    ReLU kink than any single-parameter perturbation can push them.

    The loss is not differentiable at a kink; central differences straddling
    one measure the subgradient average, not the analytic gradient, so such
    batches are resampled (deterministically, from the seeded stream).
    """
    while True:
        x = rng.standard_normal((2, model.dims[0]))
        y = rng.integers(0, model.dims[-1], size=2).astype(np.intp)
        inputs, pre = _fd_forward_parts(model, x)
        bump = eps * max(float(np.abs(a).max()) for a in inputs)
        bump = max(bump, eps)  # bias perturbations shift by eps exactly
        if all(float(np.abs(z).min()) > 2.0 * bump for z in pre[:-1]):
            return x, y


def test_c1_gradient_correctness_full_model(rng):
    started = time.time()
    model = init(MODEL_SEED)
    worst = 0.0
    for _ in range(5):
        x, y = _kink_safe_batch(rng, model, eps=1e-4)
        _, analytic_w, analytic_b = loss_and_gradients(model, (x, y))
        fd_w, fd_b = batched_fd_gradients(model, x, y, eps=1e-4)
        for a, f in zip(analytic_w + analytic_b, fd_w + fd_b):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
            worst = max(worst, float((np.abs(a - f) / denom).max()))
    elapsed = time.time() - started
    assert worst < 1e-4, f"worst relative error {worst:.2e}"
    assert elapsed < 60.0, f"gradient check took {elapsed:.1f}s"
    report(1, "gradient correctness",
           f"worst rel err {worst:.2e} over 5 batches of the 180-350-250-11 "
           f"model, {elapsed:.1f}s")


# --- criterion 2: uniform-loss sanity -------------------------------------------


def test_c2_uniform_loss_sanity():
    model = init(MODEL_SEED)
    probs = forward(model, np.zeros(180))
    assert np.all(np.abs(probs - 1.0 / 11.0) < 1e-9)
    x = np.zeros((3, 180))
    y = np.array([0, 5, 10], dtype=np.intp)
    loss, _, _ = loss_and_gradients(model, (x, y))
    assert abs(loss - math.log(11)) < 1e-9
    report(2, "uniform-loss sanity", f"loss {loss:.12f} vs ln(11) {math.log(11):.12f}")


# --- criterion 3: training proxy -------------------------------------------------


@pytest.fixture(scope="module")
def trained_pipeline():
    started = time.time()
    scenario = ScenarioConfig(seed=TRAIN_SEED, n_states=TRAIN_STATES,
                              max_player_speed_frac=0.0, min_label_margin=1.5)
    states = generate_states(scenario)
    samples = build_dataset(states)
    train_set, test_set = split_dataset(samples, 0.8, seed=SPLIT_SEED)
    config = TrainConfig(learning_rate=0.01, batch_size=32, epochs=20,
                         seed=MODEL_SEED, standardize=True)
    model, history = train(init(MODEL_SEED), train_set, test_set, config)
    elapsed = time.time() - started
    return {
        "model": model,
        "history": history,
        "n_train": len(train_set),
        "n_test": len(test_set),
        "elapsed": elapsed,
    }


def test_c3_training_proxy(trained_pipeline):
    history = trained_pipeline["history"]
    best = max(h.test_accuracy for h in history)
    assert trained_pipeline["n_train"] == 40_000
    assert trained_pipeline["n_test"] == 10_000
    assert len(history) == 20
    assert best >= 0.70, f"best test accuracy {best:.4f} < 0.70"
    assert trained_pipeline["elapsed"] < 600.0
    report(3, "training proxy",
           f"best test accuracy {best:.4f} on 10k held-out samples, "
           f"{trained_pipeline['elapsed']:.0f}s for 50k states + 20 epochs")


# --- criterion 4: tree-search oracle equivalence ----------------------------------


def test_c4_tree_search_oracle_equivalence(rng):
    from conftest import make_state, TEAM_SPOTS

    spots = list(TEAM_SPOTS)
    spots[8] = (0.0, 0.0)
    state = make_state(ball=(0.0, 0.0), team_spots=spots, owner=9)

    for _ in range(200):
        participants = [9] + sorted(
            int(u) for u in rng.choice([u for u in range(1, 12) if u != 9],
                                       size=int(rng.integers(2, 5)), replace=False))
        table = random_table(rng, participants)
        budget = int(rng.integers(2, 11))
        root = build_root(state, 10)
        tree, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=budget)
        expected = oracle_grow(table, 9, budget)
        assert tree_signature(tree) == oracle_signature(expected)
        assert list(tree.expansion_order) == [n["id"] for n in expected]

    checked = 0
    heuristic = HeuristicPredictor()
    for i in range(10_000):
        full = random_state(rng, kickable_owner=True)
        root = build_root(full, 10)
        if i % 10 == 0:
            tree, leftovers = grow_tree(root, heuristic, 10, node_budget=10)
        else:
            tree, leftovers = grow_tree(root, TabulatedPredictor(random_table(rng)),
                                        10, node_budget=10)
        owners = [n.ball_owner for n in tree.nodes]
        assert len(tree.nodes) <= 10
        assert len(set(owners)) == len(owners)
        if leftovers:
            assert len(tree.nodes) == 10
        checked += 1
    report(4, "tree-search oracle equivalence",
           f"200 tabulated instances node-for-node, {checked} full instances")


# --- criterion 5: pass-simulation oracle equivalence -------------------------------


def test_c5_pass_simulation_oracle(rng):
    agreements = 0
    for _ in range(10_000):
        state = random_state(rng)
        spec = random_pass(rng, state)
        a = simulate_pass(state, spec)
        b = oracle_simulate_pass(state, spec)
        assert results_agree(a, b), f"{a} != {b} for {spec}"
        agreements += 1
    report(5, "pass-simulation oracle equivalence", f"{agreements}/10000 agree")


# --- criterion 6: positioning geometry ---------------------------------------------


def test_c6_positioning_geometry(rng):
    for _ in range(10_000):
        pos = Vec2(float(rng.uniform(-52, 52)), float(rng.uniform(-33, 33)))
        cands = generate_candidates(pos)
        assert len(cands) == 24
        for c in cands:
            assert abs(c.point.dist(pos) - c.ring_radius) < 1e-9

    chosen = 0
    for _ in range(10_000):
        state = random_state(rng, kickable_owner=True)
        passer = state.ball_owner
        unmarker = next(u for u in range(1, 12) if u != passer)
        point = choose_position(state, passer, unmarker)
        if point is None:
            continue
        cands = evaluate_candidates(state, passer, unmarker)
        match = next((c for c in cands if c.point == point), None)
        assert match is not None, "chosen point is not a generated candidate"
        assert match.valid
        chosen += 1
    report(6, "positioning geometry",
           f"24 ring points within 1e-9 on 10k positions; "
           f"{chosen} choices all valid generated candidates")


# --- criterion 7: voronoi correctness ----------------------------------------------


def test_c7_voronoi_correctness(rng):
    for _ in range(100):
        sites = random_sites(rng, n=11)
        diagram = voronoi_diagram(sites)
        for v in diagram.vertices:
            dists = sorted(v.dist(s) for s in sites)
            assert dists[2] - dists[0] < 1e-6
            assert dists[0] >= dists[2] - 1e-6
        reference = halfplane_voronoi_vertices(sites)
        assert match_vertex_sets(diagram.vertices, reference, tol=1e-5)

    square = voronoi_diagram([Vec2(10, 10), Vec2(10, -10), Vec2(-10, 10), Vec2(-10, -10)])
    assert len(square.vertices) == 1
    assert square.vertices[0].dist(Vec2(0, 0)) < 1e-9
    report(7, "voronoi correctness",
           "100 random 11-site sets match the half-plane reference; "
           "square corners give the single center vertex")


# --- criterion 8: benchmark direction ----------------------------------------------


def test_c8_benchmark_direction(trained_pipeline):
    started = time.time()
    predictor = MlpPredictor(trained_pipeline["model"])
    result = bench(["V1", "V2", "V3", "V4", "V5", "V6"], BENCH_EPISODES,
                   BENCH_SEED, predictor)
    elapsed = time.time() - started
    rows = {r.version: r for r in result.rows}
    v1, v2, v6 = rows["V1"], rows["V2"], rows["V6"]
    assert v1.pass_accuracy >= v6.pass_accuracy, \
        f"V1 accuracy {v1.pass_accuracy:.4f} < V6 {v6.pass_accuracy:.4f}"
    assert v2.pass_accuracy >= v6.pass_accuracy, \
        f"V2 accuracy {v2.pass_accuracy:.4f} < V6 {v6.pass_accuracy:.4f}"
    assert v1.mean_shot_opportunities >= v6.mean_shot_opportunities, \
        f"V1 shots {v1.mean_shot_opportunities:.3f} < V6 {v6.mean_shot_opportunities:.3f}"
    assert v2.mean_shot_opportunities >= v6.mean_shot_opportunities, \
        f"V2 shots {v2.mean_shot_opportunities:.3f} < V6 {v6.mean_shot_opportunities:.3f}"
    assert elapsed < 900.0, f"bench took {elapsed:.0f}s"
    report(8, "benchmark direction",
           f"accuracy V1 {v1.pass_accuracy:.3f} / V2 {v2.pass_accuracy:.3f} >= "
           f"V6 {v6.pass_accuracy:.3f}; shots V1 {v1.mean_shot_opportunities:.2f} / "
           f"V2 {v2.mean_shot_opportunities:.2f} >= V6 {v6.mean_shot_opportunities:.2f}; "
           f"{elapsed:.0f}s for 6x{BENCH_EPISODES} episodes")


# --- criterion 9: CLI determinism ---------------------------------------------------


def test_c9_cli_determinism(tmp_path, capsys):
    from tactic2d.cli import main

    def run(args):
        code = main(args)
        out = capsys.readouterr()
        assert code == 0, out.err
        return out.out

    def files_after(commands, workdir):
        contents = {}
        for cmd in commands:
            stdout = run(cmd).replace(str(workdir), "<dir>")
            contents.setdefault("stdout", []).append(stdout)
        for path in sorted(workdir.iterdir()):
            contents[path.name] = path.read_bytes()
        return contents

    def pipeline(workdir, workers):
        states = workdir / "states.jsonl"
        data = workdir / "data.csv"
        model = workdir / "model.json"
        state = workdir / "state.json"
        tree = workdir / "tree.json"
        rep = workdir / "report.csv"
        cmds = [
            ["gen-states", "--seed", "7", "--count", "40", "--out", str(states)],
            ["gen-data", "--states", str(states), "--mirror", "--out", str(data)],
            ["train", "--data", str(data), "--split", "0.8", "--seed", "2",
             "--epochs", "2", "--lr", "0.01", "--batch", "16", "--out", str(model)],
            ["eval", "--model", str(model), "--data", str(data)],
        ]
        results = files_after(cmds, workdir)
        import json as _json

        from tactic2d.world import kickable, load_state

        line = next(l for l in (workdir / "states.jsonl").read_text().splitlines()
                    if kickable(load_state(l), _json.loads(l)["ball_owner"]))
        state.write_text(line)
        owner = _json.loads(line)["ball_owner"]
        unmarker = 1 if owner != 1 else 2
        more = [
            ["decide", "--model", str(model), "--state", str(state),
             "--unmarker", str(unmarker), "--dump-tree", str(tree)],
            ["bench", "--versions", "V1,V4,V6", "--episodes", "4", "--seed", "3",
             "--model", str(model), "--workers", str(workers), "--out", str(rep)],
        ]
        extra = files_after(more, workdir)
        results["stdout"].extend(extra.pop("stdout"))
        results.update(extra)
        return results

    first = pipeline(tmp_path / "a", 1) if (tmp_path / "a").mkdir() is None else None
    second = pipeline(tmp_path / "b", 1) if (tmp_path / "b").mkdir() is None else None
    third = pipeline(tmp_path / "c", 3) if (tmp_path / "c").mkdir() is None else None
    assert first["stdout"] == second["stdout"] == third["stdout"]
    for name in first:
        if name == "stdout":
            continue
        assert first[name] == second[name], f"{name} differs between identical reruns"
        assert first[name] == third[name], f"{name} differs across worker counts"
    report(9, "CLI determinism",
           f"{len(first) - 1} output files byte-identical across reruns and "
           f"worker counts 1 vs 3")
