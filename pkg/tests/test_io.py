import json

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_sequence
from netcpd import ConfigError, DetectorConfig, FormatError, ground_truth, hard_instance_detect
from netcpd.io import (
    format_edge_list,
    format_value,
    load_config,
    merge_documents,
    parse_config,
    parse_edge_list,
    read_table,
    read_truth,
    write_table,
    write_truth,
    build_model,
)


# -- edge lists ---------------------------------------------------------------


def test_edge_list_hand_example():
    text = "netcpd-layers v1 n=4 T=2\n# comment\n\n1 1 2\n2 3 4\n"
    seq = parse_edge_list(text)
    assert seq.shape == (2, 4, 4) and seq.dtype == np.uint8
    assert seq[0, 0, 1] == seq[0, 1, 0] == 1 and seq[1, 2, 3] == 1 and seq.sum() == 4


def test_empty_sequence_has_no_edge_lines():
    text = format_edge_list(np.zeros((3, 5, 5), dtype=np.uint8))
    assert [ln for ln in text.splitlines() if ln and not ln.startswith("#")] == ["netcpd-layers v1 n=5 T=3"]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), T=st.integers(1, 5), n=st.integers(2, 9), p=st.floats(0, 1))
def test_edge_list_round_trip(seed, T, n, p):
    seq = random_sequence(np.random.default_rng(seed), T, n, p)
    text = format_edge_list(seq)
    np.testing.assert_array_equal(parse_edge_list(text), seq)
    assert format_edge_list(parse_edge_list(text)) == text


@pytest.mark.parametrize(
    "text,lineno",
    [
        ("netcpd-layers v2 n=3 T=1\n", 1),
        ("netcpd-layers v1 n=3 T=1\n1 1 2\n1 2\n", 3),
        ("netcpd-layers v1 n=3 T=1\n1 1 x\n", 2),
        ("netcpd-layers v1 n=3 T=1\n\n2 1 2\n", 3),
        ("netcpd-layers v1 n=3 T=1\n1 1 4\n", 2),
        ("netcpd-layers v1 n=3 T=1\n1 2 1\n", 2),
        ("netcpd-layers v1 n=3 T=1\n1 2 2\n", 2),
        ("netcpd-layers v1 n=3 T=2\n1 1 2\n# again\n1 1 2\n", 4),
    ],
)
def test_edge_list_errors_carry_line_numbers(text, lineno):
    with pytest.raises(FormatError) as info:
        parse_edge_list(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


# -- configs ------------------------------------------------------------------


BASE = {"seed": 3, "model": {"kind": "erdos_renyi", "n": 10, "T": 12, "rho": 0.2}, "detector": {"kappa": 6}}


def test_parse_full_config():
    cfg = parse_config(merge_documents(BASE, {"harness": {"replicates": 7}, "sweep": {"alphas": [0, 0.5]}}))
    assert cfg.seed == 3 and cfg.detector == DetectorConfig(kappa=6, seed=3)
    assert cfg.harness.replicates == 7 and cfg.sweep.alphas == (0, 0.5)


@pytest.mark.parametrize(
    "patch,key",
    [
        ({"colour": 1}, "colour"),
        ({"model": {"density": 0.1}}, "model.density"),
        ({"detector": {"spectral_tol": 1e-6}}, "detector.spectral_tol"),
        ({"detector": {"kappa": 2}}, "detector.kappa"),
        ({"detector": {"windows": [9]}}, "detector.windows"),
        ({"detector": {"M": 0}}, "detector.M"),
        ({"detector": {"kappa": "six"}}, "detector.kappa"),
        ({"harness": {"target_type_i": 1.5}}, "harness.target_type_i"),
        ({"harness": {"algorithm": "bcd"}}, "harness.algorithm"),
        ({"seed": -1}, "seed"),
        ({"seed": True}, "seed"),
        ({"model": {"kind": "sbm"}}, "model.kind"),
    ],
)
def test_config_errors_name_the_key(patch, key):
    with pytest.raises(ConfigError) as info:
        parse_config(merge_documents(BASE, patch))
    assert info.value.key == key


def test_merge_is_deep():
    merged = merge_documents({"detector": {"kappa": 6, "M": 5}}, {"detector": {"theta_mu": 0.4}})
    assert merged == {"detector": {"kappa": 6, "M": 5, "theta_mu": 0.4}}


def test_load_config_layers_files(tmp_path):
    a, b = tmp_path / "a.yaml", tmp_path / "b.json"
    a.write_text(yaml.safe_dump(BASE))
    b.write_text(json.dumps({"detector": {"theta_mu": 0.25}}))
    cfg = load_config(a, b)
    assert cfg.detector.theta_mu == 0.25 and cfg.detector.kappa == 6
    bad = tmp_path / "bad.yaml"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_build_models():
    q = build_model(parse_config(BASE).model)
    assert (q.n, q.T, q.K) == (10, 12, 0)
    seg = parse_config({"model": {"kind": "segments", "n": 6, "segments": [{"end": 4, "p": 0.1}, {"end": 9, "sizes": [3, 3], "probs": [[0.5, 0.1], [0.1, 0.5]]}]}})
    q = build_model(seg.model)
    assert q.change_points == (4,) and q.T == 9
    stair = parse_config({"model": {"kind": "staircase", "n": 8, "T": 12, "rho": 0.2, "alpha": 0.5, "change_points": [4, 8]}})
    q = build_model(stair.model, seed=1)
    assert q.K == 2 and np.array_equal(q.matrices[0], q.matrices[2])
    with pytest.raises(ConfigError):
        build_model(parse_config({"model": {"kind": "hard_detect", "n": 8, "T": 12}}).model)
    with pytest.raises(ConfigError):
        build_model(parse_config({"model": {"kind": "hard_detect", "n": 8, "T": 12, "kappa": 4, "rho": 0.5, "alpha": 3.0}}).model)


# -- tables and sidecars -----------------------------------------------------------


def test_format_value():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(123456789.123456789) == "123456789.123"
    assert format_value(2.0) == "2"
    assert [format_value(v) for v in (True, np.int64(4), float("inf"), float("nan"))] == ["true", "4", "inf", "nan"]


def test_table_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ("a", "b"), [(1, 0.1 + 0.2), {"a": 2, "b": 1e-20}])
    header, rows = read_table(path)
    assert header == ["a", "b"] and rows == [["1", "0.3"], ["2", "1e-20"]]
    assert path.read_text().startswith("a,b\n")
    with pytest.raises(ValueError):
        write_table(path, ("a", "b"), [(1,)])


def test_truth_sidecar_round_trip(tmp_path):
    q = hard_instance_detect(10, 12, 4, 0.2, 0.5, seed=0)
    truth = ground_truth(q)
    write_truth(tmp_path / "t.json", truth, seed=0, n=10, T=12)
    back, doc = read_truth(tmp_path / "t.json")
    assert back == truth and doc["seed"] == 0 and doc["T"] == 12
