"""JSON design configuration: parsing, validation and defaults.

Values in the file use micrometers, amperes, tesla and pascals; the parsed
:class:`DesignConfig` holds SI spec objects.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InvalidSpecError
from .magnetics import MAGNETIZATION_MODELS
from .model import CoilSpec, DiaphragmSpec, MagnetSpec, um

SCHEMA_VERSION = 1
PAPER_TABLES = "paper_tables.json"

# section -> key -> (kind, default); default None means required.
# kind: "pos" > 0, "nonneg" >= 0, "int" integer >= 1, "nu" Poisson ratio, or a tuple of choices.
SCHEMA = {
    "coil": {
        "inner_radius_um": ("pos", None),
        "turns": ("int", None),
        "width_um": ("pos", None),
        "spacing_um": ("pos", None),
        "thickness_um": ("pos", 20.0),
        "current_a": ("pos", None),
    },
    "magnet": {
        "radius_um": ("pos", None),
        "thickness_um": ("pos", None),
        "remanence_t": ("pos", None),
        "coercivity_a_per_m": ("pos", "absent"),
        "magnetization_model": (MAGNETIZATION_MODELS, "auto"),
    },
    "diaphragm": {
        "radius_um": ("pos", None),
        "thickness_um": ("pos", None),
        "youngs_modulus_pa": ("pos", None),
        "poisson_ratio": ("nu", None),
        "yield_strength_pa": ("pos", None),
    },
    "target": {
        "deflection_um": ("nonneg", None),
        "safety_factor": ("pos", 2.0),
        "current_ceiling_a": ("pos", 1.0),
    },
    "numerics": {
        "quadrature_order": ("int", 16),
        "fd_nodes": ("int", 512),
        "fidelity": ("int", 1),
        "gap_mode": (("volume", "point"), "volume"),
    },
}

_OPTIONAL_SECTIONS = {"numerics"}


@dataclass(frozen=True)
class DesignConfig:
    coil: CoilSpec
    magnet: MagnetSpec
    diaphragm: DiaphragmSpec
    current: float
    target_deflection: float
    safety_factor: float
    current_ceiling: float
    quadrature_order: int
    fd_nodes: int
    fidelity: int
    gap_mode: str
    magnetization_model: str
    defaults_applied: tuple
    document: dict  # validated document with defaults filled in
    source: str = ""

    @property
    def hash(self) -> str:
        return config_hash(self.document)

    @property
    def kappa(self) -> float:
        return self.diaphragm.kappa(self.magnet)

    def notes(self):
        for key in self.defaults_applied:
            section, name = key.split(".")
            yield f"default applied: {key} = {self.document[section].get(name, 'absent')}"


def config_hash(document: dict) -> str:
    blob = json.dumps(document, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _check_value(key, kind, value):
    if isinstance(kind, tuple):
        if value not in kind:
            raise ConfigError(f"{key}: must be one of {', '.join(kind)}, got {value!r}", key)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}", key)
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite", key)
    if kind == "int":
        if int(value) != value or value < 1:
            raise ConfigError(f"{key}: must be an integer >= 1, got {value!r}", key)
        return int(value)
    if kind == "pos" and not value > 0:
        raise ConfigError(f"{key}: must be positive, got {value!r}", key)
    if kind == "nonneg" and value < 0:
        raise ConfigError(f"{key}: must be >= 0, got {value!r}", key)
    if kind == "nu" and not (0 <= value <= 0.5):
        raise ConfigError(f"{key}: Poisson ratio must be in [0, 0.5], got {value!r}", key)
    return float(value)


def validate(doc) -> tuple[dict, tuple]:
    """Check ``doc`` against the schema; returns (document with defaults, defaulted keys)."""
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    if "schema_version" not in doc:
        raise ConfigError("schema_version: required", "schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {doc['schema_version']!r}", "schema_version")
    unknown = set(doc) - set(SCHEMA) - {"schema_version"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{key}: unknown key", key)
    out = {"schema_version": SCHEMA_VERSION}
    defaulted = []
    for section, fields in SCHEMA.items():
        raw = doc.get(section)
        if raw is None:
            if section not in _OPTIONAL_SECTIONS:
                raise ConfigError(f"{section}: required section missing", section)
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{section}: must be an object", section)
        extra = set(raw) - set(fields)
        if extra:
            key = f"{section}.{sorted(extra)[0]}"
            raise ConfigError(f"{key}: unknown key", key)
        sec = {}
        for name, (kind, default) in fields.items():
            key = f"{section}.{name}"
            if name in raw:
                sec[name] = _check_value(key, kind, raw[name])
            elif default is None:
                raise ConfigError(f"{key}: required", key)
            else:
                defaulted.append(key)
                if default != "absent":
                    sec[name] = default
        out[section] = sec
    return out, tuple(defaulted)


def from_document(doc: dict, source: str = "") -> DesignConfig:
    document, defaulted = validate(copy.deepcopy(doc))
    c, m, d, t, n = (document[s] for s in ("coil", "magnet", "diaphragm", "target", "numerics"))
    try:
        coil = CoilSpec(c["turns"], um(c["inner_radius_um"]), um(c["width_um"]), um(c["spacing_um"]),
                        um(c["thickness_um"]))
        magnet = MagnetSpec(um(m["radius_um"]), um(m["thickness_um"]), m["remanence_t"],
                            m.get("coercivity_a_per_m"))
        dia = DiaphragmSpec(um(d["radius_um"]), um(d["thickness_um"]), d["youngs_modulus_pa"],
                            d["poisson_ratio"], d["yield_strength_pa"])
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from exc
    if m["magnetization_model"] == "demagnetized" and magnet.coercivity is None:
        raise ConfigError("magnet.magnetization_model: 'demagnetized' needs magnet.coercivity_a_per_m",
                          "magnet.magnetization_model")
    return DesignConfig(
        coil=coil,
        magnet=magnet,
        diaphragm=dia,
        current=c["current_a"],
        target_deflection=um(t["deflection_um"]),
        safety_factor=t["safety_factor"],
        current_ceiling=t["current_ceiling_a"],
        quadrature_order=n["quadrature_order"],
        fd_nodes=n["fd_nodes"],
        fidelity=n["fidelity"],
        gap_mode=n["gap_mode"],
        magnetization_model=m["magnetization_model"],
        defaults_applied=defaulted,
        document=document,
        source=source,
    )


def parse_config(path) -> DesignConfig:
    """Read and validate a JSON design config."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return from_document(doc, str(path))


def paper_tables_path() -> Path:
    return Path(str(resources.files("micropump") / "data" / PAPER_TABLES))


def load_paper_config() -> DesignConfig:
    return parse_config(paper_tables_path())
