"""File formats: layered edge lists, run configurations, result tables, truth sidecars.

Edge-list files look like::

    netcpd-layers v1 n=4 T=2
    # layer i j, 1-based, i < j
    1 1 2
    2 3 4

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .detectors import DetectorConfig
from .exceptions import ConfigError, FormatError, NetCPDError
from .models import (
    GroundTruth,
    ProbabilitySequence,
    block_matrix,
    erdos_renyi_matrix,
    hard_instance_detect,
    hard_instance_localize,
)

__all__ = [
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
    "ModelSpec",
    "HarnessSpec",
    "SweepSpec",
    "RunConfig",
    "load_config",
    "parse_config",
    "merge_documents",
    "build_model",
    "write_table",
    "read_table",
    "format_value",
    "write_truth",
    "read_truth",
    "DETECT_COLUMNS",
    "SWEEP_COLUMNS",
]

_HEADER = re.compile(r"^netcpd-layers\s+v1\s+n=(\d+)\s+T=(\d+)\s*$")

DETECT_COLUMNS = ("algorithm", "tau_hat", "lambda", "interval_start", "interval_end", "stat", "threshold")
SWEEP_COLUMNS = (
    "alpha",
    "rho",
    "kappa",
    "cushion",
    "signal",
    "sparsity",
    "boundary_ratio",
    "type_i",
    "type_ii",
    "pi_hat",
    "ci",
    "localized",
    "seconds",
)


# -- edge lists ---------------------------------------------------------------


def format_edge_list(seq):
    """Serialise a ``(T, n, n)`` binary sequence as edge-list text."""
    seq = np.asarray(seq)
    T, n = seq.shape[0], seq.shape[1]
    lines = [f"netcpd-layers v1 n={n} T={T}"]
    t_idx, i_idx, j_idx = np.nonzero(np.triu(seq, k=1))
    lines.extend(f"{t + 1} {i + 1} {j + 1}" for t, i, j in zip(t_idx, i_idx, j_idx))
    return "\n".join(lines) + "\n"


def write_edge_list(path, seq):
    Path(path).write_text(format_edge_list(seq))


def parse_edge_list(text):
    """Parse edge-list text into a ``uint8`` array of shape ``(T, n, n)``.

    Raises
    ------
    FormatError
        On a missing or malformed header, a malformed edge line, an index
        out of range, ``i >= j`` or a repeated edge; ``lineno`` is set.
    """
    seq = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if seq is None:
            m = _HEADER.match(line)
            if not m:
                raise FormatError(f"expected header 'netcpd-layers v1 n=<n> T=<T>', got {line!r}", lineno)
            n, T = int(m.group(1)), int(m.group(2))
            if T < 1:
                raise FormatError("T must be at least 1", lineno)
            seq = np.zeros((T, n, n), dtype=np.uint8)
            continue
        parts = line.split()
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise FormatError(f"expected 't i j' with positive integers, got {line!r}", lineno)
        t, i, j = (int(p) for p in parts)
        if not 1 <= t <= T:
            raise FormatError(f"layer {t} outside 1..{T}", lineno)
        if not 1 <= i < j <= n:
            raise FormatError(f"vertices must satisfy 1 <= i < j <= {n}, got i={i} j={j}", lineno)
        if seq[t - 1, i - 1, j - 1]:
            raise FormatError(f"duplicate edge ({t}, {i}, {j})", lineno)
        seq[t - 1, i - 1, j - 1] = seq[t - 1, j - 1, i - 1] = 1
    if seq is None:
        raise FormatError("missing header line", 1)
    return seq


def read_edge_list(path):
    return parse_edge_list(Path(path).read_text())


# -- run configuration --------------------------------------------------------


_MODEL_KINDS = ("erdos_renyi", "segments", "staircase", "hard_detect", "hard_localize")


@dataclass(frozen=True)
class ModelSpec:
    """Generator parameters; which fields apply depends on ``kind``.

    ``erdos_renyi``: ``n, T, rho``. ``segments``: ``n`` plus ``segments``, a
    list of ``{end, p}`` or ``{end, sizes, probs}`` mappings. ``staircase``:
    ``n, T, rho, alpha, change_points``; segments alternate between G(n, rho)
    and a rank-one perturbation of scale ``alpha``. ``hard_detect`` and
    ``hard_localize``: ``n, T, kappa, rho, alpha`` and for the latter
    ``r, side``.
    """

    kind: str = "erdos_renyi"
    n: int | None = None
    T: int | None = None
    rho: float = 0.0
    alpha: float = 0.0
    kappa: int | None = None
    r: int = 1
    side: str = "early"
    change_points: tuple = ()
    segments: tuple = ()


@dataclass(frozen=True)
class HarnessSpec:
    algorithm: str = "window"
    replicates: int = 100
    target_type_i: float = 0.05


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple = (0.0,)
    rhos: tuple = (0.1,)
    kappas: tuple = (15,)


@dataclass(frozen=True)
class RunConfig:
    seed: int | None = None
    model: ModelSpec | None = None
    detector: DetectorConfig | None = None
    harness: HarnessSpec = field(default_factory=HarnessSpec)
    sweep: SweepSpec | None = None
    output: str | None = None


_SECTIONS = {"seed", "model", "detector", "harness", "sweep", "output"}


def merge_documents(base, update):
    """Recursive merge of two config mappings; ``update`` wins."""
    out = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_documents(out[key], value)
        else:
            out[key] = value
    return out


def _check_keys(section, doc, allowed):
    if not isinstance(doc, dict):
        raise ConfigError("expected a mapping", key=section)
    for key in doc:
        if key not in allowed:
            raise ConfigError("unknown key", key=f"{section}.{key}" if section else str(key))


def _typed(section, key, value, kind):
    name = f"{section}.{key}"
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key=name)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key=name)
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key=name)
        return value
    if kind is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"expected a list, got {value!r}", key=name)
        return tuple(value)
    return value


_MODEL_TYPES = {
    "kind": str, "n": int, "T": int, "rho": float, "alpha": float, "kappa": int,
    "r": int, "side": str, "change_points": tuple, "segments": tuple,
}
_HARNESS_TYPES = {"algorithm": str, "replicates": int, "target_type_i": float}
_DETECTOR_TYPES = {
    "kappa": int, "windows": tuple, "mu": float, "zeta": float, "theta_mu": float,
    "M": int, "merge_proximity": int, "degree_scope": str,
}


def _section(name, doc, types):
    _check_keys(name, doc, set(types))
    return {k: _typed(name, k, v, types[k]) for k, v in doc.items()}


def parse_config(doc):
    """Validate a configuration mapping and return a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Naming the offending key for unknown keys, wrong types and values
        that violate a constraint.
    """
    if doc is None:
        doc = {}
    _check_keys("", doc, _SECTIONS)
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError(f"expected a non-negative integer, got {seed!r}", key="seed")

    model = None
    if "model" in doc:
        params = _section("model", doc["model"], _MODEL_TYPES)
        model = ModelSpec(**params)
        if model.kind not in _MODEL_KINDS:
            raise ConfigError(f"must be one of {', '.join(_MODEL_KINDS)}", key="model.kind")
        if model.side not in ("early", "late"):
            raise ConfigError("must be 'early' or 'late'", key="model.side")

    detector = None
    if "detector" in doc:
        params = _section("detector", doc["detector"], _DETECTOR_TYPES)
        if "kappa" not in params:
            raise ConfigError("missing required key", key="detector.kappa")
        try:
            detector = DetectorConfig(seed=seed, **params)
        except NetCPDError as exc:
            msg = str(exc)
            named = [k for k in params if k in msg]
            bad = min(named, key=msg.find) if named else None
            raise ConfigError(str(exc), key=f"detector.{bad}" if bad else "detector") from None

    harness = HarnessSpec(**_section("harness", doc.get("harness", {}), _HARNESS_TYPES))
    if harness.algorithm not in ("window", "wbs"):
        raise ConfigError("must be 'window' or 'wbs'", key="harness.algorithm")
    if harness.replicates < 1:
        raise ConfigError("must be >= 1", key="harness.replicates")
    if not 0 < harness.target_type_i < 1:
        raise ConfigError("must lie in (0, 1)", key="harness.target_type_i")

    sweep = None
    if "sweep" in doc:
        params = _section("sweep", doc["sweep"], {"alphas": tuple, "rhos": tuple, "kappas": tuple})
        sweep = SweepSpec(**params)
        for key in ("alphas", "rhos", "kappas"):
            if not getattr(sweep, key):
                raise ConfigError("must be a non-empty list", key=f"sweep.{key}")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("expected a path string", key="output")
    return RunConfig(seed=seed, model=model, detector=detector, harness=harness, sweep=sweep, output=output)


def load_config(*paths):
    """Read and merge one or more YAML/JSON files, later files overriding earlier ones."""
    doc = {}
    for path in paths:
        try:
            part = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        if part is None:
            continue
        if not isinstance(part, dict):
            raise ConfigError(f"{path} must contain a mapping")
        doc = merge_documents(doc, part)
    return parse_config(doc)


def _require(spec, *names):
    for name in names:
        if getattr(spec, name) is None:
            raise ConfigError(f"required for kind {spec.kind!r}", key=f"model.{name}")


def _rank_one(n, rho, alpha, seed):
    u = np.random.default_rng(seed).choice([-1.0, 1.0], size=n)
    base = erdos_renyi_matrix(n, rho)
    theta = base + alpha * rho * np.outer(u, u)
    np.fill_diagonal(theta, 0.0)
    return base, theta


def build_model(spec: ModelSpec, seed=None):
    """Construct the probability sequence described by ``spec``.

    Invalid parameter combinations surface as :class:`ConfigError`.
    """
    try:
        if spec.kind == "erdos_renyi":
            _require(spec, "n", "T")
            return ProbabilitySequence.constant(erdos_renyi_matrix(spec.n, spec.rho), spec.T)
        if spec.kind == "segments":
            _require(spec, "n")
            segs = []
            for k, seg in enumerate(spec.segments):
                _check_keys(f"model.segments[{k}]", seg, {"end", "p", "sizes", "probs"})
                if "sizes" in seg:
                    segs.append((block_matrix(seg["sizes"], seg["probs"]), seg["end"]))
                else:
                    segs.append((erdos_renyi_matrix(spec.n, seg["p"]), seg["end"]))
            return ProbabilitySequence.from_segments(segs)
        if spec.kind == "staircase":
            _require(spec, "n", "T")
            base, theta = _rank_one(spec.n, spec.rho, spec.alpha, seed)
            mats = tuple(base if k % 2 == 0 else theta for k in range(len(spec.change_points) + 1))
            return ProbabilitySequence(mats, tuple(spec.change_points), spec.T)
        _require(spec, "n", "T", "kappa")
        if spec.kind == "hard_detect":
            return hard_instance_detect(spec.n, spec.T, spec.kappa, spec.rho, spec.alpha, seed=seed)
        return hard_instance_localize(
            spec.n, spec.T, spec.kappa, spec.rho, spec.alpha, r=spec.r, side=spec.side, seed=seed
        )
    except ConfigError:
        raise
    except (NetCPDError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc), key="model") from None


# -- result tables ------------------------------------------------------------


def format_value(value):
    """Render a table cell; floats keep 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def write_table(path, columns, rows):
    """Write ``rows`` (mappings or sequences) as CSV with a header line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            values = [row[c] for c in columns] if isinstance(row, dict) else list(row)
            if len(values) != len(columns):
                raise ValueError(f"row has {len(values)} cells, header has {len(columns)}")
            writer.writerow([format_value(v) for v in values])


def read_table(path):
    """Return ``(header, rows)`` with every cell as a string."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


# -- ground-truth sidecar -----------------------------------------------------


def write_truth(path, truth: GroundTruth, *, seed, n, T):
    doc = {
        "change_points": list(truth.change_points),
        "n_change_points": truth.n_change_points,
        "cushion": truth.cushion,
        "signal": truth.signal,
        "sparsity": truth.sparsity,
        "pop_d": truth.pop_d,
        "pop_frakd": truth.pop_frakd,
        "jump_frobenius": list(truth.jump_frobenius),
        "seed": seed,
        "n": n,
        "T": T,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_truth(path):
    doc = json.loads(Path(path).read_text())
    names = {f.name for f in fields(GroundTruth)}
    kwargs = {k: doc[k] for k in names}
    kwargs["change_points"] = tuple(kwargs["change_points"])
    kwargs["jump_frobenius"] = tuple(kwargs["jump_frobenius"])
    return GroundTruth(**kwargs), doc
