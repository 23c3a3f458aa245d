"""JSON model configuration files.

A config names one model and the settings used to verify it::

    {
      "model_id": "single_mode",
      "kind": "single_pair",
      "single_pair": {"T": {"diag": [1.0]}, "lambda": 1.0, "g": [1.0]},
      "verify": {"nmax": [8, 16, 24, 32], "k": 5, "samples": 1000},
      "sweep": {"P_grid": [[0.0], [0.5], [1.0]]}
    }

Matrices are ``{"diag": [...]}`` or ``{"dense": [[...], ...]}``; any scalar
entry may be a complex number written as ``[re, im]``. The parameter block
sits under the key named by ``kind``:

``pair``                ``T``, ``couplings`` (list of ``{"lambda", "g"}``),
                        optional ``real_structure`` (``"canonical_real"`` or
                        ``{"explicit_J": {"U": matrix}}``), optional ``dim``
``single_pair``         ``T``, ``lambda``, ``g``
``oscillator_field``    ``omega``, ``lambda``, ``T``, ``g``
``pauli_fierz_dipole``  ``omegas``, ``T``, ``gs``
``ti_fiber``            ``T``, ``gs``, ``P``
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigParseError
from .models import fiber_base_model, oscillator_field, pauli_fierz_dipole, single_pair
from .pair_model import CANONICAL_REAL, Conjugation, PairModel

__all__ = [
    "KINDS",
    "DEFAULT_TOLERANCES",
    "VerifySettings",
    "ModelConfig",
    "load_config",
    "parse_config",
    "build_model",
    "bundled_config_path",
    "bundled_config_names",
]

KINDS = ("pair", "single_pair", "oscillator_field", "pauli_fierz_dipole", "ti_fiber")

# Absolute tolerances unless noted; "symplectic" is multiplied by dim and
# "energy_crosscheck" by (1 + |E|) where they are applied.
DEFAULT_TOLERANCES = {
    "symplectic": 1e-9,
    "energy_crosscheck": 1e-9,
    "sandwich": 1e-9,
    "intertwining": 1e-9,
    "appendix_b": 1e-9,
    "bijectivity": 1e-9,
    "commutator": 1e-9,
    "spectrum": 1e-5,
    "spectrum_monotone": 1e-12,
    "oracle": 1e-5,
    "identity": 1e-9,
    "fiber_ons": 1e-10,
}


@dataclass(frozen=True)
class VerifySettings:
    nmax: tuple = (8, 16, 24, 32)
    k: int = 5
    samples: int = 1000
    commutator_nmax: int = 8
    inequality_nmax: int = 12
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


@dataclass(frozen=True, eq=False)
class ModelConfig:
    path: str
    model_id: str
    kind: str
    params: dict
    verify: VerifySettings
    sweep: dict | None = None


def _fail(path, fld, msg):
    raise ConfigParseError(path, fld, msg)


def _scalar(x, path, fld, real=False):
    if isinstance(x, bool):
        _fail(path, fld, "expected a number, got a boolean")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        if real:
            _fail(path, fld, "expected a real number")
        return complex(x[0], x[1])
    _fail(path, fld, f"expected a number or [re, im], got {x!r}")


def _vector(x, path, fld, real=False) -> np.ndarray:
    if not isinstance(x, list) or not x:
        _fail(path, fld, "expected a non-empty list")
    vals = [_scalar(v, path, f"{fld}[{i}]", real) for i, v in enumerate(x)]
    if any(isinstance(v, complex) for v in vals):
        return np.array(vals, dtype=complex)
    return np.array(vals, dtype=float)


def _matrix(x, path, fld) -> np.ndarray:
    if not isinstance(x, dict) or len(x) != 1 or next(iter(x)) not in ("diag", "dense"):
        _fail(path, fld, 'expected {"diag": [...]} or {"dense": [[...]]}')
    if "diag" in x:
        return np.diag(_vector(x["diag"], path, f"{fld}.diag"))
    rows = x["dense"]
    if not isinstance(rows, list) or not rows:
        _fail(path, f"{fld}.dense", "expected a non-empty list of rows")
    out = [_vector(r, path, f"{fld}.dense[{i}]") for i, r in enumerate(rows)]
    n = len(out)
    if any(r.shape != (n,) for r in out):
        _fail(path, f"{fld}.dense", f"expected a square {n}x{n} matrix")
    return np.array(out)


def _require(block, key, path, prefix):
    if key not in block:
        _fail(path, f"{prefix}.{key}", "missing")
    return block[key]


def _int(x, path, fld, minimum=0) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < minimum:
        _fail(path, fld, f"expected an integer >= {minimum}")
    return x


def _check_len(v, n, path, fld):
    if v.shape != (n,):
        _fail(path, fld, f"length {v.shape[0]} does not match dim {n}")


def _parse_pair(block, path):
    T = _matrix(_require(block, "T", path, "pair"), path, "pair.T")
    n = T.shape[0]
    if "dim" in block and _int(block["dim"], path, "pair.dim", 1) != n:
        _fail(path, "pair.dim", f"dim {block['dim']} does not match T ({n})")
    raw = _require(block, "couplings", path, "pair")
    if not isinstance(raw, list):
        _fail(path, "pair.couplings", "expected a list")
    couplings = []
    for i, c in enumerate(raw):
        fld = f"pair.couplings[{i}]"
        if not isinstance(c, dict):
            _fail(path, fld, "expected an object with lambda and g")
        lam = _scalar(_require(c, "lambda", path, fld), path, f"{fld}.lambda", real=True)
        g = _vector(_require(c, "g", path, fld), path, f"{fld}.g")
        _check_len(g, n, path, f"{fld}.g")
        couplings.append((lam, g))
    rs = block.get("real_structure", CANONICAL_REAL)
    if rs != CANONICAL_REAL:
        if not isinstance(rs, dict) or "explicit_J" not in rs or not isinstance(rs["explicit_J"], dict):
            _fail(path, "pair.real_structure", 'expected "canonical_real" or {"explicit_J": {"U": matrix}}')
        U = _matrix(_require(rs["explicit_J"], "U", path, "pair.real_structure.explicit_J"), path,
                    "pair.real_structure.explicit_J.U")
        if U.shape != (n, n):
            _fail(path, "pair.real_structure.explicit_J.U", f"expected a {n}x{n} matrix")
        rs = Conjugation(U)
    return {"T": T, "couplings": couplings, "real_structure": rs}


def _parse_single_pair(block, path):
    T = _matrix(_require(block, "T", path, "single_pair"), path, "single_pair.T")
    g = _vector(_require(block, "g", path, "single_pair"), path, "single_pair.g")
    _check_len(g, T.shape[0], path, "single_pair.g")
    lam = _scalar(_require(block, "lambda", path, "single_pair"), path, "single_pair.lambda", real=True)
    return {"T": T, "lambda": lam, "g": g}


def _parse_oscillator(block, path):
    T = _matrix(_require(block, "T", path, "oscillator_field"), path, "oscillator_field.T")
    g = _vector(_require(block, "g", path, "oscillator_field"), path, "oscillator_field.g")
    _check_len(g, T.shape[0], path, "oscillator_field.g")
    omega = _scalar(_require(block, "omega", path, "oscillator_field"), path, "oscillator_field.omega", real=True)
    if omega <= 0:
        _fail(path, "oscillator_field.omega", "must be positive")
    lam = _scalar(_require(block, "lambda", path, "oscillator_field"), path, "oscillator_field.lambda", real=True)
    return {"omega": omega, "lambda": lam, "T": T, "g": g}


def _vector_list(raw, n, path, fld, real=False):
    if not isinstance(raw, list) or not raw:
        _fail(path, fld, "expected a non-empty list of vectors")
    out = []
    for i, g in enumerate(raw):
        v = _vector(g, path, f"{fld}[{i}]", real)
        _check_len(v, n, path, f"{fld}[{i}]")
        out.append(v)
    return out


def _parse_dipole(block, path):
    T = _matrix(_require(block, "T", path, "pauli_fierz_dipole"), path, "pauli_fierz_dipole.T")
    omegas = _vector(_require(block, "omegas", path, "pauli_fierz_dipole"), path, "pauli_fierz_dipole.omegas", True)
    if np.any(omegas <= 0):
        _fail(path, "pauli_fierz_dipole.omegas", "all entries must be positive")
    gs = _vector_list(_require(block, "gs", path, "pauli_fierz_dipole"), T.shape[0], path,
                      "pauli_fierz_dipole.gs", real=True)
    if len(gs) != omegas.shape[0]:
        _fail(path, "pauli_fierz_dipole.gs", f"{len(gs)} vectors for {omegas.shape[0]} omegas")
    return {"omegas": omegas, "T": T, "gs": gs}


def _parse_fiber(block, path):
    T = _matrix(_require(block, "T", path, "ti_fiber"), path, "ti_fiber.T")
    gs = _vector_list(_require(block, "gs", path, "ti_fiber"), T.shape[0], path, "ti_fiber.gs")
    P = _vector(block.get("P", [0.0] * len(gs)), path, "ti_fiber.P", real=True)
    if P.shape != (len(gs),):
        _fail(path, "ti_fiber.P", f"expected {len(gs)} components")
    return {"T": T, "gs": gs, "P": P}


_PARSERS = {
    "pair": _parse_pair,
    "single_pair": _parse_single_pair,
    "oscillator_field": _parse_oscillator,
    "pauli_fierz_dipole": _parse_dipole,
    "ti_fiber": _parse_fiber,
}


def _parse_verify(block, path) -> VerifySettings:
    if block is None:
        return VerifySettings()
    if not isinstance(block, dict):
        _fail(path, "verify", "expected an object")
    base = VerifySettings()
    nmax = block.get("nmax", list(base.nmax))
    if not isinstance(nmax, list) or not nmax:
        _fail(path, "verify.nmax", "expected a non-empty list of integers")
    nmax = tuple(_int(v, path, f"verify.nmax[{i}]") for i, v in enumerate(nmax))
    tols = dict(DEFAULT_TOLERANCES)
    for name, val in block.get("tolerances", {}).items():
        if name not in tols:
            _fail(path, f"verify.tolerances.{name}", "unknown tolerance name")
        tols[name] = _scalar(val, path, f"verify.tolerances.{name}", real=True)
    return VerifySettings(
        nmax=nmax,
        k=_int(block.get("k", base.k), path, "verify.k", 1),
        samples=_int(block.get("samples", base.samples), path, "verify.samples", 1),
        commutator_nmax=_int(block.get("commutator_nmax", base.commutator_nmax), path, "verify.commutator_nmax", 3),
        inequality_nmax=_int(block.get("inequality_nmax", base.inequality_nmax), path, "verify.inequality_nmax", 2),
        tolerances=tols,
    )


def _parse_sweep(block, path):
    if block is None:
        return None
    if not isinstance(block, dict) or not ({"P_grid", "ir_family"} & block.keys()):
        _fail(path, "sweep", 'expected "P_grid" and/or "ir_family"')
    out = {}
    if "P_grid" in block:
        grid = block["P_grid"]
        if not isinstance(grid, list) or not grid:
            _fail(path, "sweep.P_grid", "expected a non-empty list of momentum vectors")
        out["P_grid"] = [_vector(p, path, f"sweep.P_grid[{i}]", real=True) for i, p in enumerate(grid)]
    if "ir_family" in block:
        fam = block["ir_family"]
        if not isinstance(fam, dict):
            _fail(path, "sweep.ir_family", "expected an object")
        ts = _vector(_require(fam, "t", path, "sweep.ir_family"), path, "sweep.ir_family.t", real=True)
        if np.any(ts <= 0):
            _fail(path, "sweep.ir_family.t", "all t must be positive")
        tail = _vector(fam.get("T_tail", [1.0]), path, "sweep.ir_family.T_tail", real=True)
        gs = _vector_list(fam.get("gs", [[1.0] + [0.0] * tail.shape[0]]), tail.shape[0] + 1, path,
                          "sweep.ir_family.gs", real=True)
        P = _vector(fam.get("P", [1.0] * len(gs)), path, "sweep.ir_family.P", real=True)
        if P.shape != (len(gs),):
            _fail(path, "sweep.ir_family.P", f"expected {len(gs)} components")
        out["ir_family"] = {"t": ts, "T_tail": tail, "gs": gs, "P": P}
    return out


def parse_config(data, path="<config>") -> ModelConfig:
    """Validate a decoded JSON document and return a :class:`ModelConfig`."""
    if not isinstance(data, dict):
        _fail(path, "<root>", "expected a JSON object")
    model_id = _require(data, "model_id", path, "<root>")
    if not isinstance(model_id, str) or not model_id or "/" in model_id:
        _fail(path, "model_id", "expected a non-empty string without '/'")
    kind = _require(data, "kind", path, "<root>")
    if kind not in KINDS:
        _fail(path, "kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    block = _require(data, kind, path, "<root>")
    if not isinstance(block, dict):
        _fail(path, kind, "expected an object")
    params = _PARSERS[kind](block, path)
    return ModelConfig(
        path=str(path),
        model_id=model_id,
        kind=kind,
        params=params,
        verify=_parse_verify(data.get("verify"), path),
        sweep=_parse_sweep(data.get("sweep"), path),
    )


def bundled_config_names() -> list[str]:
    root = resources.files("pairdiag") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_config_path(name: str) -> Path:
    path = Path(str(resources.files("pairdiag") / "configs" / f"{name}.json"))
    if not path.is_file():
        raise ConfigParseError(name, "<file>", f"no bundled config named {name!r}")
    return path


def load_config(path) -> ModelConfig:
    """Read a config file; ``@name`` refers to a config bundled with the package."""
    path = str(path)
    if path.startswith("@"):
        path = bundled_config_path(path[1:])
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigParseError(path, "<file>", exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(path, "<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, path)


def build_model(cfg: ModelConfig) -> PairModel:
    """Construct the PairModel described by ``cfg`` (may raise module errors)."""
    p = cfg.params
    if cfg.kind == "pair":
        model = PairModel(p["T"], tuple(p["couplings"]), p["real_structure"])
    elif cfg.kind == "single_pair":
        model = single_pair(p["T"], p["lambda"], p["g"])
    elif cfg.kind == "oscillator_field":
        model = oscillator_field(p["omega"], p["lambda"], p["T"], p["g"])
    elif cfg.kind == "pauli_fierz_dipole":
        model = pauli_fierz_dipole(p["omegas"], p["T"], p["gs"])
    else:
        model = fiber_base_model(p["T"], p["gs"])
    return PairModel(model.T, model.couplings, model.real_structure, model.energy_offset, cfg.model_id)
