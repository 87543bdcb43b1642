"""Architecture builders: block structure, shape flow, and calibration."""

import numpy as np
import pytest

from mobivsr import (
    CHANNEL_PLAN_CANDIDATES,
    CLIP_INPUT_SHAPE,
    DEFAULT_CHANNEL_PLAN,
    LayerGraph,
    LayerSpec,
    Tensor,
    aggregate,
    build_lipres,
    build_mobivsr,
    calibrate_channel_plan,
    conv2d,
    init_weights,
    reference_presets,
    run_graph,
    shape_infer,
)


def block_graph(block):
    """Wrap a single block in a runnable graph behind an identity stem."""
    nodes = [("stem", LayerSpec("relu"))]
    edges = []
    for suffix, spec in block.layers:
        nodes.append((suffix, spec))
    for src, dst in block.edges:
        edges.append(("stem" if src == "@in" else src, dst))
    return LayerGraph(nodes=nodes, residual_edges=edges)


def test_block_count_is_4_alpha():
    for alpha in (1, 2, 3):
        graph = build_mobivsr(alpha)
        adds = [i for i, s in graph.nodes if s.kind == "residual_add"]
        assert len(adds) == 4 * alpha


def test_downsample_blocks_always_three():
    for alpha in (1, 2, 4):
        graph = build_mobivsr(alpha)
        skips = [i for i, s in graph.nodes if i.endswith(".skip")]
        assert len(skips) == 3


@pytest.mark.parametrize("alpha", range(1, 12))
def test_shape_inference_succeeds_for_alpha_grid(alpha):
    out, _ = shape_infer(build_mobivsr(alpha), CLIP_INPUT_SHAPE)
    assert out == (500,)


def test_frontend_and_stack_spatial_extents():
    graph = build_mobivsr(1)
    _, shapes = shape_infer(graph, CLIP_INPUT_SHAPE)
    assert shapes["frontend.ds3d2"][1][-2:] == (24, 24)
    assert shapes["s4.b1.add"][1][-2:] == (3, 3)
    assert shapes["frontend.ds3d2"][1][1] == 29  # frame count intact


def test_keep_block_preserves_shape():
    block = build_lipres("keep", 4, 4)
    graph = block_graph(block)
    x = np.abs(np.random.default_rng(0).normal(size=(4, 7, 7))).astype(np.float32)
    result = run_graph(graph, init_weights(graph, seed=1), Tensor.from_array(x))
    assert result.output.shape == (4, 7, 7)


def test_keep_block_requires_matching_channels():
    with pytest.raises(ValueError):
        build_lipres("keep", 4, 8)
    with pytest.raises(ValueError):
        build_lipres("keep", 0, 0)
    with pytest.raises(ValueError):
        build_lipres("sideways", 4, 4)


def test_downsample_block_halves_spatial_extent():
    block = build_lipres("downsample", 4, 8)
    graph = block_graph(block)
    _, shapes = shape_infer(graph, (4, 24, 24))
    assert shapes["add"][1] == (8, 12, 12)


def test_downsample_skip_is_a_stride2_conv_of_the_block_input():
    block = build_lipres("downsample", 3, 6)
    graph = block_graph(block)
    weights = init_weights(graph, seed=2)
    x = np.abs(np.random.default_rng(3).normal(size=(3, 10, 10))).astype(np.float32)
    result = run_graph(graph, weights, Tensor.from_array(x), keep_outputs=True)
    direct = conv2d(Tensor.from_array(x), weights["skip"]["weights"], stride=2).as_array()
    np.testing.assert_array_equal(result.node_outputs["skip"], direct)


def test_parameter_increment_constant_in_alpha():
    params = [aggregate(build_mobivsr(a)).totals.params for a in (1, 2, 3, 4, 5)]
    increments = [b - a for a, b in zip(params, params[1:])]
    assert len(set(increments)) == 1


def test_no_recurrent_kinds_anywhere():
    kinds = {spec.kind for _, spec in build_mobivsr(3).nodes}
    assert not kinds & {"lstm", "gru", "rnn"}
    assert kinds <= {
        "ds_conv3d", "batchnorm", "relu", "ds_conv2d", "conv2d", "residual_add",
        "spatial_avg", "temporal_conv1d", "maxpool", "temporal_avg", "fc", "softmax",
    }


def test_alpha_must_be_positive_int():
    with pytest.raises(ValueError):
        build_mobivsr(0)
    with pytest.raises(ValueError):
        build_mobivsr(-2)


def test_reference_presets_are_the_two_comparison_rows():
    presets = reference_presets()
    assert len(presets) == 2
    by_name = {p.name: p for p in presets}
    sota = by_name["LSTM + ResNet (SOTA)"]
    assert (sota.size_mb, sota.params_m, sota.flops_b) == (130.0, 25.1, 290.0)
    baseline = by_name["LRW Baseline"]
    assert (baseline.size_mb, baseline.params_m, baseline.flops_b) == (43.2, 8.7, 95.7)


def test_calibration_selects_the_frozen_default_plan():
    assert calibrate_channel_plan() == DEFAULT_CHANNEL_PLAN


def test_calibration_rejects_infeasible_candidates():
    infeasible = [p for p in CHANNEL_PLAN_CANDIDATES if p.name != "base"]
    with pytest.raises(ValueError):
        calibrate_channel_plan(candidates=infeasible)


def test_graph_records_the_channel_plan():
    assert build_mobivsr(2).channel_plan == DEFAULT_CHANNEL_PLAN.name
