import math

import numpy as np
import pytest
import torch

from avtse.datagen.corpus import Corpus
from avtse.errors import ConfigurationError
from avtse.evaluation.conditions import (
    ConditionReport,
    InferenceCondition,
    condition_aux,
    evaluate_condition,
)
from avtse.evaluation.metrics import si_sdri
from avtse.evaluation.report import (
    EMPTY_CELL,
    raw_values_filename,
    write_raw_values,
    write_report_grid,
)
from avtse.model.network import MtseNet

from conftest import tiny_config
from test_training_loop import tiny_corpus_spec


@pytest.fixture(scope="module")
def examples():
    corpus = Corpus(tiny_corpus_spec())
    split = corpus.materialize("test")
    return [split.example(i) for i in range(len(split))]


@pytest.fixture(scope="module")
def net():
    torch.manual_seed(2)
    model = MtseNet(tiny_config())
    model.eval()
    return model


def test_sisdri_identity_is_zero(examples):
    for ex in examples:
        assert si_sdri(ex.mixture, ex.mixture, ex.target) == 0.0


def test_sisdri_hand_case():
    s = np.array([1.0, 0.0])
    x = np.array([1.0, 1.0])
    est = np.array([1.0, 0.5])
    got = si_sdri(x, est, s)
    assert got == pytest.approx(10.0 * math.log10(4.0), abs=1e-6)


def test_sisdri_perfect_estimate(examples):
    ex = examples[0]
    value = si_sdri(ex.mixture, ex.target, ex.target)
    from avtse.training.losses import si_sdr_cap, si_sdr_numpy

    want = si_sdr_cap() - si_sdr_numpy(ex.mixture.samples, ex.target.samples)
    assert value == pytest.approx(want, abs=1e-9)


def test_condition_validation():
    with pytest.raises(ConfigurationError):
        InferenceCondition("XYZ", "MDT")
    with pytest.raises(ConfigurationError):
        InferenceCondition("MTSE_FD", "MDT", fd_rate=1.5)
    with pytest.raises(ConfigurationError):
        InferenceCondition("MTSE", "XXX")


def test_strategy_mismatch_rejected(net, examples):
    condition = InferenceCondition("MTSE", "MDT")
    with pytest.raises(ConfigurationError):
        evaluate_condition(net, examples, condition, strategy="ST")


def test_zeroing_semantics_mdt_vs_mtt(examples, rng):
    ex = examples[0]
    # dropout-trained: AoTSE zeroes the video embedding and skips the net
    aux = condition_aux(ex, InferenceCondition("AoTSE", "MDT"), rng)
    assert aux.video is None and aux.use_video is False
    aux = condition_aux(ex, InferenceCondition("VoTSE", "MDT"), rng)
    assert aux.enrolment is None and aux.use_audio is False
    # input-zeroing convention for standard/multi-task checkpoints
    aux = condition_aux(ex, InferenceCondition("AoTSE", "MTT"), rng)
    assert aux.video is not None and float(aux.video.abs().max()) == 0.0
    aux = condition_aux(ex, InferenceCondition("VoTSE", "ST"), rng)
    assert aux.enrolment is not None and float(aux.enrolment.abs().max()) == 0.0
    # frame drop zeroes exactly round(rate * T_v) contiguous frames
    aux = condition_aux(ex, InferenceCondition("MTSE_FD", "MDT", fd_rate=1.0 / 3.0), rng)
    t_v = ex.video.n_frames
    zero_rows = int((aux.video[0].abs().sum(dim=1) == 0).sum())
    assert zero_rows == round(t_v / 3.0)


def test_mtse_condition_is_plain_forward(net, examples, rng):
    ex = examples[0]
    aux = condition_aux(ex, InferenceCondition("MTSE", "MDT"), rng)
    assert aux.use_audio is None and aux.use_video is None
    assert float((aux.video - torch.as_tensor(ex.video.features, dtype=torch.float32)).abs().max()) == 0.0


def test_aotse_mdt_bypasses_video_net(net, examples, rng):
    from avtse.evaluation.conditions import extract

    ex = examples[0]
    _, diag = extract(net, ex, InferenceCondition("AoTSE", "MDT"), rng)
    assert diag.video_items == 0  # clue network never invoked
    assert diag.weights.shape[1] == 2
    _, diag_mtt = extract(net, ex, InferenceCondition("AoTSE", "MTT"), rng)
    assert diag_mtt.video_items == 1  # zero stream still runs through the net


def test_evaluation_is_side_effect_free(net, examples):
    mtse = InferenceCondition("MTSE", "MDT")
    before = evaluate_condition(net, examples, mtse, strategy="MDT")
    evaluate_condition(net, examples, InferenceCondition("AoTSE", "MDT"), strategy="MDT")
    evaluate_condition(net, examples, InferenceCondition("MTSE_FD", "MDT"), strategy="MDT")
    after = evaluate_condition(net, examples, mtse, strategy="MDT")
    assert before.values == after.values


def test_aggregates_permutation_invariant(net, examples):
    rep = evaluate_condition(net, examples, InferenceCondition("MTSE", "MDT"), strategy="MDT")
    shuffled = evaluate_condition(
        net, list(reversed(examples)), InferenceCondition("MTSE", "MDT"), strategy="MDT"
    )
    assert rep.mean == pytest.approx(shuffled.mean, abs=1e-12)
    assert rep.sd == pytest.approx(shuffled.sd, abs=1e-12)


def test_report_mean_sd_convention():
    rep = ConditionReport("MTSE", "MDT", {}, values=[1.0, 2.0, 3.0])
    assert rep.mean == pytest.approx(2.0)
    assert rep.sd == pytest.approx(1.0)  # sample SD (n-1)


def test_report_grid_layout(tmp_path):
    tag = {"causal": False, "strategy": "MDT", "norm_kind": "LN"}
    reports = [
        ConditionReport("MTSE", "MDT", tag, values=[1.0, 2.0, 3.0]),
        ConditionReport("VoTSE", "MDT", tag, values=[0.5, 1.5]),
    ]
    path = write_report_grid(tmp_path / "grid.csv", reports)
    lines = path.read_text().splitlines()
    assert lines[0] == "causality,strategy,norm,MTSE,AoTSE,VoTSE,MTSE_FD"
    cells = lines[1].split(",")
    assert cells[:3] == ["non-causal", "MDT", "LN"]
    assert cells[3] == "2.0 ± 1.0"
    assert cells[4] == EMPTY_CELL  # no AoTSE report
    assert cells[5] == "1.0 ± 0.7"


def test_report_grid_row_order_deterministic(tmp_path):
    tags = [
        {"causal": True, "strategy": "ST", "norm_kind": "cLN"},
        {"causal": False, "strategy": "MDT", "norm_kind": "LN"},
        {"causal": False, "strategy": "MDT", "norm_kind": "gLN"},
    ]
    reports = [ConditionReport("MTSE", t["strategy"], t, values=[1.0, 1.0]) for t in tags]
    path = write_report_grid(tmp_path / "grid.csv", reports)
    rows = [ln.split(",")[:3] for ln in path.read_text().splitlines()[1:]]
    assert rows == sorted(rows)


def test_raw_values_file(tmp_path):
    tag = {"causal": True, "strategy": "MDT", "norm_kind": "cLN"}
    rep = ConditionReport("AoTSE", "MDT", tag, values=[1.25, -0.5])
    path = write_raw_values(tmp_path, rep)
    assert path.name == raw_values_filename(tag, "AoTSE") == "raw_causal_MDT_cLN_AoTSE.txt"
    values = [float(v) for v in path.read_text().split()]
    assert values == [1.25, -0.5]


def test_violin_rendering(tmp_path):
    pytest.importorskip("matplotlib")
    from avtse.evaluation.report import render_violin

    path = render_violin(
        tmp_path / "v.png", {"MTSE": [1.0, 2.0, 3.0], "AoTSE": [0.0, 1.0, -1.0]}
    )
    assert path.exists() and path.stat().st_size > 0
