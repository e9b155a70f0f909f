"""Ensemble decision rule, detection-log rendering, and model IO."""

import numpy as np
import pytest

from trojangym.core import HtType, Variant
from trojangym.detector import (Decision, GcnModel, TrojanEnsemble,
                                assemble_prediction, init_params)
from trojangym.detector.model_io import (ModelFormatError, load_ensemble,
                                         load_model, save_ensemble,
                                         save_model, write_embeddings)
from trojangym.dfg import build_dfg
from trojangym.dfg.graph import GraphMeta
from trojangym.orchestrator import LogFiles, format_detection_log
from trojangym.verilog import parse_source

# Probabilities replayed from a recorded detector run: HT1 fires at the
# default threshold, the other three models stay quiet.
RECORDED = {
    HtType.HT1: (0.4360, 0.5640),
    HtType.HT2: (0.7099, 0.2901),
    HtType.HT3: (0.8551, 0.1449),
    HtType.HT4: (0.8986, 0.1014),
}

RECORDED_LOG = """% [FILES]:
Test file:
  uart_rx/uart_rx_HT3_llama-3.3-70b-versatile_A3.v

Log file:
  detection_log_uart_rx_HT3_llama-3.3-70b-versatile_A3.txt

% [INITIALIZATION]:
Initializing...
Loading models...
  ✓ HT1 loaded
  ✓ HT2 loaded
  ✓ HT3 loaded
  ✓ HT4 loaded
Total models loaded: 4

% [GRAPH CONSTRUCTION]:
Preparing test design...
Converting design to graph...

/content/test_design/topModule.v , 74 , 138 , 2.1530489921569824
Graph: 74 nodes, 138 edges

% [DETECTION RESULTS]:
Model Predictions:
  HT1:  TROJAN  | Clean=0.4360, Trojan=0.5640
  HT2:  CLEAN   | Clean=0.7099, Trojan=0.2901
  HT3:  CLEAN   | Clean=0.8551, Trojan=0.1449
  HT4:  CLEAN   | Clean=0.8986, Trojan=0.1014

Triggered Models: HT1
Final Decision:  TROJAN DETECTED
"""


def fresh_ensemble(base_seed: int = 100, threshold: float = 0.5):
    models = {ht: GcnModel(params=init_params(seed=base_seed + i),
                           trained_for=ht)
              for i, ht in enumerate(HtType)}
    return TrojanEnsemble(models=models, threshold=threshold)


def test_recorded_probabilities_trigger_ht1_only():
    prediction = assemble_prediction(RECORDED, threshold=0.5)
    assert prediction.triggered == frozenset({HtType.HT1})
    assert prediction.decision is Decision.TROJAN
    assert prediction.trojan_prob(HtType.HT1) == 0.5640


def test_threshold_is_inclusive_at_the_boundary():
    probs = dict(RECORDED)
    probs[HtType.HT1] = (0.5, 0.5)
    prediction = assemble_prediction(probs, threshold=0.5)
    assert HtType.HT1 in prediction.triggered


def test_all_models_quiet_means_clean():
    probs = {ht: (0.9, 0.1) for ht in HtType}
    prediction = assemble_prediction(probs, threshold=0.5)
    assert prediction.triggered == frozenset()
    assert prediction.decision is Decision.CLEAN


def test_detection_log_matches_recorded_run_byte_for_byte():
    files = LogFiles(
        test_file="uart_rx/uart_rx_HT3_llama-3.3-70b-versatile_A3.v",
        log_file="detection_log_uart_rx_HT3_llama-3.3-70b-versatile_A3.txt")
    stats = GraphMeta(node_count=74, edge_count=138,
                      extraction_seconds=2.1530489921569824)
    prediction = assemble_prediction(RECORDED, threshold=0.5)
    rendered = format_detection_log(
        files, stats, prediction,
        stats_filename="/content/test_design/topModule.v")
    assert rendered == RECORDED_LOG


def test_detection_log_clean_variant():
    files = LogFiles(test_file="x.v", log_file="detection_log_x.txt")
    stats = GraphMeta(node_count=3, edge_count=2, extraction_seconds=0.5)
    prediction = assemble_prediction({ht: (0.9, 0.1) for ht in HtType}, 0.5)
    rendered = format_detection_log(files, stats, prediction)
    assert "Triggered Models: none" in rendered
    assert rendered.endswith("Final Decision:  CLEAN\n")
    # stats row falls back to the test file when no staging path is given
    assert "\nx.v , 3 , 2 , 0.5\n" in rendered


def test_ensemble_requires_all_four_models():
    models = {ht: GcnModel(params=init_params(seed=1), trained_for=ht)
              for ht in list(HtType)[:3]}
    with pytest.raises(ValueError, match="HT4"):
        TrojanEnsemble(models=models)


@pytest.mark.parametrize("threshold", [0.0, 1.0, -0.2, 1.7])
def test_out_of_range_threshold_rejected(threshold):
    models = {ht: GcnModel(params=init_params(seed=1), trained_for=ht)
              for ht in HtType}
    with pytest.raises(ValueError):
        TrojanEnsemble(models=models, threshold=threshold)


SMALL_DESIGN = """module probe (
    input wire clk,
    input wire [7:0] a,
    output reg [7:0] q
);
    always @(posedge clk) begin
        q <= a ^ 8'h2d;
    end
endmodule
"""


def small_graph():
    return build_dfg(parse_source(SMALL_DESIGN).ast)


def test_predict_and_budgeted_predict_agree():
    ensemble = fresh_ensemble()
    dfg = small_graph()
    direct = ensemble.predict(dfg)
    budgeted = ensemble.predict_with_budget(dfg, budget_seconds=None)
    assert budgeted is not None
    assert budgeted.per_model == direct.per_model
    assert budgeted.decision is direct.decision


def test_exhausted_budget_returns_none():
    ensemble = fresh_ensemble()
    assert ensemble.predict_with_budget(small_graph(),
                                        budget_seconds=-1.0) is None


def test_fingerprint_is_stable_and_weight_sensitive():
    a = fresh_ensemble()
    b = fresh_ensemble()
    assert a.fingerprint() == b.fingerprint()
    assert len(a.fingerprint()) == 12
    int(a.fingerprint(), 16)
    c = fresh_ensemble(threshold=0.7)
    assert c.fingerprint() != a.fingerprint()
    d = fresh_ensemble()
    d.models[HtType.HT2].params.W1[0, 0] += 1e-9
    assert d.fingerprint() != a.fingerprint()


def test_ensemble_save_load_round_trip(tmp_path):
    ensemble = fresh_ensemble(threshold=0.37)
    save_ensemble(tmp_path / "models", ensemble)
    loaded = load_ensemble(tmp_path / "models")
    assert loaded.threshold == 0.37
    assert loaded.fingerprint() == ensemble.fingerprint()
    for ht in HtType:
        for name, arr in ensemble.models[ht].params.arrays().items():
            assert np.array_equal(arr, loaded.models[ht].params.arrays()[name])


def test_missing_model_file_is_an_error(tmp_path):
    save_ensemble(tmp_path, fresh_ensemble())
    (tmp_path / "HT3.model").unlink()
    with pytest.raises(ModelFormatError, match="missing model file"):
        load_ensemble(tmp_path)


def test_missing_threshold_file_defaults_to_half(tmp_path):
    save_ensemble(tmp_path, fresh_ensemble(threshold=0.9))
    (tmp_path / "threshold").unlink()
    assert load_ensemble(tmp_path).threshold == 0.5


def test_single_model_round_trip_preserves_meta(tmp_path):
    model = GcnModel(params=init_params(seed=8), trained_for=HtType.HT2)
    model.training_meta.epochs = 17
    model.training_meta.final_train_loss = 0.125
    model.training_meta.lr_history = [0.5] * 10 + [0.25] * 7
    save_model(model, tmp_path / "one.model")
    loaded = load_model(tmp_path / "one.model")
    assert loaded.trained_for is HtType.HT2
    assert loaded.training_meta.epochs == 17
    assert loaded.training_meta.lr_history == model.training_meta.lr_history
    assert np.array_equal(loaded.params.Wout, model.params.Wout)


def test_corrupt_model_file_rejected(tmp_path):
    (tmp_path / "bad.model").write_text("not a model\n", encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "bad.model")


def test_embedding_export_shape(tmp_path):
    rows = [
        ("uart_rx", Variant.ORI, HtType.HT1, [0.5, -1.25]),
        ("uart_rx", Variant.A1, HtType.HT1, [0.0, 3.5]),
    ]
    count = write_embeddings(tmp_path / "emb.csv", rows)
    assert count == 2
    text = (tmp_path / "emb.csv").read_text(encoding="utf-8")
    lines = text.strip().split("\n")
    assert lines[0] == "design_id,variant,ht_model,dim0,dim1"
    assert lines[1] == "uart_rx,ORI,HT1,0.5,-1.25"
    assert lines[2] == "uart_rx,A1,HT1,0.0,3.5"


def test_embedding_export_rejects_ragged_rows(tmp_path):
    rows = [
        ("a", Variant.ORI, HtType.HT1, [0.5, 1.0]),
        ("b", Variant.A1, HtType.HT1, [0.5]),
    ]
    with pytest.raises(ValueError):
        write_embeddings(tmp_path / "emb.csv", rows)
