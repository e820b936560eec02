import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from core.codecs.pca import fit_pca
from core.codecs.registry import save_codec
from core.cql.bundle import PolicyBundle, save_bundle
from core.env.actions import HOLD_ACTION, N_ACTIONS
from core.evaluation.metrics import metrics, normalized_discounted, time_to_feasible, ttf_cdf
from core.evaluation.plots import plot, read_table
from core.evaluation.rollout import EpisodeTrace, bundle_controller, read_trace, run_episode, write_trace
from core.evaluation.suite import CDF_FILE, COMPARISON_FILE, SuiteEntry, evaluate_suite
from core.exceptions.config import ConfigurationError
from core.exceptions.domain import DimensionMismatch, DomainError
from core.exceptions.formats import ArtifactMissing, ParseError
from core.learnkit.mlp import Mlp
from helpers import SMALL_STATE_DIM
from schemas.evaluation import EvalConfig


def hold_bundle(input_dim: int = SMALL_STATE_DIM, codec_id: str = "raw") -> PolicyBundle:
    q = Mlp(weights=[np.zeros((N_ACTIONS, input_dim), dtype=np.float32)], biases=[np.eye(N_ACTIONS, dtype=np.float32)[HOLD_ACTION]])
    return PolicyBundle(q_net=q, target_q=q.copy(), actor=None, input_dim=input_dim, codec_id=codec_id)


def make_trace(n_star, n_served, reward, num_users=3) -> EpisodeTrace:
    horizon = len(n_star)
    return EpisodeTrace(
        policy_id="test",
        episode_seed=0,
        num_users=num_users,
        t=np.arange(horizon),
        n_served=np.array(n_served),
        n_star=np.array(n_star),
        reward=np.array(reward, dtype=np.float64),
        uav_pos=np.zeros((horizon, 3)),
    )


MIXED = make_trace([3, 3, 0, 2], [1, 3, 0, 2], [1 / 3, 1.0, 0.0, 1.0])
NEVER = make_trace([0, 0, 0, 0], [0, 0, 0, 0], [0.0, 0.0, 0.0, 0.0])


def test_metrics_on_mixed_trace():
    report = metrics([MIXED], gamma=0.5)

    assert report.avg_served == 1.5
    assert report.peak_served == 3.0
    assert (report.feas_full, report.feas_partial, report.feas_none) == (0.5, 0.25, 0.25)
    assert report.gap_histogram == {0: 2, 2: 1}
    assert report.time_to_feasible == [1]
    assert report.normalized_discounted == pytest.approx((1 / 3 + 0.5 + 0.125) / 1.625)


def test_infeasible_episode():
    assert normalized_discounted(NEVER, gamma=0.99) == 0.0
    assert time_to_feasible(NEVER) == 4

    report = metrics([MIXED, NEVER], gamma=0.5)
    assert report.feas_none == pytest.approx(5 / 8)
    assert report.ttf_median == 2.5


def test_metrics_rejects_bad_input():
    with pytest.raises(DomainError):
        metrics([])
    with pytest.raises(DomainError):
        metrics([MIXED, make_trace([1], [1], [1.0])])


def test_ttf_cdf_is_censored_at_horizon():
    assert ttf_cdf([1, 4], horizon=4).tolist() == [0.0, 0.5, 0.5, 0.5, 1.0]
    assert ttf_cdf([0, 0, 2], horizon=2).tolist() == pytest.approx([2 / 3, 2 / 3, 1.0])


def test_hold_policy_stays_put(flat_env, env_cfg):
    trace = run_episode(flat_env, hold_bundle(), None, episode_seed=3)
    start, _ = flat_env.reset(3)

    assert trace.horizon == env_cfg.episode_len
    assert trace.t.tolist() == list(range(env_cfg.episode_len))
    assert np.all(trace.uav_pos == start.uav_pos)
    assert np.all(trace.reward == 1.0)


def test_run_episode_is_reproducible(flat_env):
    first = run_episode(flat_env, hold_bundle(), None, episode_seed=5)
    second = run_episode(flat_env, hold_bundle(), None, episode_seed=5)

    assert first.equals(second)


def test_controller_checks_dimensions(flat_env):
    with pytest.raises(DimensionMismatch):
        bundle_controller(flat_env, hold_bundle(input_dim=5), None)

    codec = fit_pca(np.random.default_rng(0).normal(size=(20, 9)), d_z=4)
    with pytest.raises(DimensionMismatch):
        bundle_controller(flat_env, hold_bundle(input_dim=4), codec)


def test_run_episode_through_codec(flat_env, env_cfg):
    codec = fit_pca(np.random.default_rng(0).normal(size=(20, SMALL_STATE_DIM)), d_z=4)
    trace = run_episode(flat_env, hold_bundle(input_dim=4), codec, episode_seed=1)

    assert trace.horizon == env_cfg.episode_len


def test_trace_file_round_trip(tmp_path):
    path = tmp_path / "ep0.csv"
    write_trace(path, MIXED)

    assert read_trace(path, "test", 0, 3).equals(MIXED)


def test_read_trace_rejects_bad_rows(tmp_path):
    path = tmp_path / "ep0.csv"
    path.write_text("t,n_served\n0,1\n")
    with pytest.raises(ParseError):
        read_trace(path, "test", 0, 3)

    write_trace(path, MIXED)
    lines = path.read_text().splitlines()
    lines[3] = "2,x,0,0.0,0.0,0.0,0.0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as excinfo:
        read_trace(path, "test", 0, 3)
    assert excinfo.value.line == 4


@pytest.fixture
def hold_entry(tmp_path) -> SuiteEntry:
    path = tmp_path / "artifacts" / "hold.uvwt"
    save_bundle(path, hold_bundle())
    return SuiteEntry(label="hold", policies={0: path})


EVAL = EvalConfig(episodes=2, seeds=[0], episode_seed_base=50)


def test_suite_tables(tmp_path, flat_env, env_cfg, hold_entry):
    out = tmp_path / "eval"
    results = evaluate_suite(flat_env, [hold_entry], EVAL, out)

    assert len(results) == 1
    with open(out / COMPARISON_FILE, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [row["method"] for row in rows] == ["hold"]
    assert float(rows[0]["avg_served"]) == 3.0
    assert float(rows[0]["normalized"]) == 1.0
    assert float(rows[0]["normalized_std"]) == 0.0
    assert float(rows[0]["ttf_median"]) == 0.0

    with open(out / CDF_FILE, newline="") as fh:
        cdf = list(csv.DictReader(fh))
    assert len(cdf) == env_cfg.episode_len + 1
    assert all(float(row["fraction"]) == 1.0 for row in cdf)

    assert (out / "metrics" / "hold.csv").is_file()
    assert (out / "traces" / "hold" / "seed0" / "ep1.csv").is_file()


def test_suite_rerun_is_identical(tmp_path, flat_env, hold_entry):
    evaluate_suite(flat_env, [hold_entry], EVAL, tmp_path / "a")
    evaluate_suite(flat_env, [hold_entry], EVAL, tmp_path / "b")

    for name in (COMPARISON_FILE, CDF_FILE, "gaps.csv", "ablation.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_suite_checks_artifacts_first(tmp_path, flat_env, hold_entry):
    missing = SuiteEntry(label="ghost", policies={0: tmp_path / "ghost.uvwt"})

    with pytest.raises(ArtifactMissing):
        evaluate_suite(flat_env, [hold_entry, missing], EVAL, tmp_path / "eval")
    assert not (tmp_path / "eval").exists()


def test_suite_rejects_codec_the_policy_was_not_trained_on(tmp_path, flat_env, hold_entry):
    codec_path = tmp_path / "codec.uvwt"
    save_codec(codec_path, fit_pca(np.random.default_rng(0).normal(size=(20, SMALL_STATE_DIM)), d_z=4))
    entry = SuiteEntry(label="hold", policies=hold_entry.policies, codecs={0: codec_path})

    with pytest.raises(ConfigurationError):
        evaluate_suite(flat_env, [entry], EVAL, tmp_path / "eval")


def test_plot_writes_well_formed_svg(tmp_path, flat_env, hold_entry):
    out = tmp_path / "eval"
    evaluate_suite(flat_env, [hold_entry], EVAL, out)

    written = plot(out, tmp_path / "figures")
    assert sorted(path.name for path in written) == ["feasibility.svg", "gaps.svg", "service.svg", "ttf_cdf.svg"]
    for path in written:
        assert ET.parse(path).getroot().tag.endswith("svg")

    again = plot(out, tmp_path / "figures-again")
    for first, second in zip(written, again):
        assert first.read_bytes() == second.read_bytes()


def test_plot_needs_metric_tables(tmp_path):
    (tmp_path / "empty").mkdir()

    with pytest.raises(ArtifactMissing):
        plot(tmp_path / "empty", tmp_path / "figures")
    assert not (tmp_path / "figures").exists()


def test_read_table_reports_missing_columns(tmp_path):
    path = tmp_path / "comparison.csv"
    path.write_text("method,avg_served\nhold,1.0\n")

    with pytest.raises(ParseError):
        read_table(path, {"method": str, "normalized": float})
