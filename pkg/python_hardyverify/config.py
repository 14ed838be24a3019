"""
Run configuration shared by every CLI command.

A RunConfig is built from command-line flags, from a YAML file, or both
(flags override the file). The file layout is

    command: verify
    target: thm21
    parameters:
      manifold: hyperbolic
      N: 3
      lambda: 0.0
      j: 0
      modes: [1]
      support: [1.0, 3.0]
      seed: 1
    quadrature:
      rel_tol: 1.0e-10
    output:
      path: report.json
      format: json
    grids:
      lambda: [0.0, 0.25, 0.5]

Every admissibility check runs in validate(), before any computation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .besselpairs import PoincareWeight, get_allowed_pairs
from .errors import ValidationError
from .geometry import get_allowed_manifolds, validate_dimension
from .logging_config import get_logger
from .quadrature import QuadratureSpec
from .sharpness import get_allowed_targets as get_allowed_sharpness_targets
from .utils.lists import grid_product
from .verifier import get_allowed_targets

logger = get_logger(__name__)

COMMANDS = ("verify", "sharpness", "sweep", "bessel")
FORMATS = ("json", "csv")

#: YAML key -> RunConfig attribute, per section
PARAMETER_KEYS = {
    "manifold": "manifold",
    "N": "N",
    "lambda": "lam",
    "alpha": "alpha",
    "beta": "beta",
    "j": "j",
    "modes": "modes",
    "support": "support",
    "seed": "seed",
    "n_knots": "n_knots",
    "pair": "pair",
    "kappa": "kappa",
    "constant": "constant",
    "sharpness_target": "sharpness_target",
    "mode": "mode",
    "levels": "levels",
    "rmin": "rmin",
    "rmax": "rmax",
    "nodes": "nodes",
}
QUADRATURE_KEYS = {
    "rel_tol": "rel_tol",
    "abs_tol": "abs_tol",
    "max_subdivisions": "max_subdivisions",
    "quad_nodes": "quad_nodes",
    "grading_exponent": "grading_exponent",
}
OUTPUT_KEYS = {"path": "output", "format": "format"}
TOP_KEYS = ("command", "target", "parameters", "quadrature", "output", "grids", "threads", "strict")

#: parameters a sweep grid may range over
GRID_KEYS = ("lambda", "alpha", "beta", "N", "j", "seed", "kappa")


def get_allowed_formats() -> list:
    """
    return output formats
    """
    return list(FORMATS)


@dataclass
class RunConfig:
    """
    Parameters of one CLI run.

    modes=None means [j + 1]. support is the radial support (s0, s1) of the
    random test functions; rmin/rmax/mode=None select the per-target
    sharpness defaults. strict turns a non-converged result into a
    ConvergenceError instead of a report.
    """

    command: str = "verify"
    target: str = "thm21"
    manifold: str = "hyperbolic"
    N: int = 3
    lam: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    j: int = -1
    modes: Optional[List[int]] = None
    support: Tuple[float, float] = (1.0, 3.0)
    seed: int = 1
    n_knots: int = 5
    pair: str = "poincare"
    kappa: float = 1.0
    constant: Optional[float] = None
    rel_tol: float = 1.0e-10
    abs_tol: float = 1.0e-14
    max_subdivisions: int = 2**16
    quad_nodes: int = 16
    grading_exponent: float = 3.0
    output: Optional[str] = None
    format: Optional[str] = None
    sharpness_target: str = "hardy"
    mode: Optional[int] = None
    levels: int = 4
    rmin: Optional[float] = None
    rmax: Optional[float] = None
    nodes: int = 200
    grids: Dict[str, List[Any]] = field(default_factory=dict)
    threads: Optional[int] = None
    strict: bool = False

    def __post_init__(self):
        self.support = tuple(float(s) for s in self.support)  # type: ignore[assignment]
        if self.modes is not None:
            self.modes = [int(n) for n in self.modes]
        self.grids = {str(k): list(v) for k, v in self.grids.items()}

    @property
    def output_format(self) -> str:
        """json for verify and bessel, csv for sharpness and sweep, unless set"""
        if self.format is not None:
            return self.format
        return "csv" if self.command in ("sharpness", "sweep") else "json"

    @property
    def mode_list(self) -> List[int]:
        return list(self.modes) if self.modes is not None else [self.j + 1]

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_subdivisions=self.max_subdivisions,
            base_rule=self.quad_nodes,
            grading_exponent=self.grading_exponent,
        )

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        """
        Build from the sectioned mapping written by to_dict().

        Raises:
            ValidationError: unknown key (field names the key)
        """
        kwargs: Dict[str, Any] = {}
        for key, value in values.items():
            if key not in TOP_KEYS:
                raise ValidationError(f"unknown configuration key {key!r}", field=key)
        for key in ("command", "target", "threads", "strict"):
            if key in values:
                kwargs[key] = values[key]
        for section, keys in (("parameters", PARAMETER_KEYS), ("quadrature", QUADRATURE_KEYS), ("output", OUTPUT_KEYS)):
            for key, value in (values.get(section) or {}).items():
                if key not in keys:
                    raise ValidationError(f"unknown key {key!r} in section {section}", field=key)
                kwargs[keys[key]] = value
        if values.get("grids"):
            kwargs["grids"] = dict(values["grids"])
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, filename: str) -> "RunConfig":
        """
        Load a YAML configuration file.

        Raises:
            ValidationError: unreadable or malformed file (field "config")
        """
        path = Path(filename)
        try:
            values = yaml.safe_load(path.read_text())
        except FileNotFoundError as e:
            raise ValidationError(f"{filename} not found", field="config") from e
        except yaml.YAMLError as e:
            raise ValidationError(f"failed to parse {filename}: {e}", field="config") from e
        if values is None:
            values = {}
        if not isinstance(values, dict):
            raise ValidationError(f"{filename} does not hold a mapping", field="config")
        logger.debug(f"RunConfig.from_yaml({filename}): {values}")
        return cls.from_dict(values)

    def to_dict(self) -> dict:
        """sectioned mapping; from_dict(to_dict()) == self"""
        data: Dict[str, Any] = {"command": self.command, "target": self.target}
        data["parameters"] = {
            key: (list(getattr(self, attr)) if key in ("support", "modes") and getattr(self, attr) is not None else getattr(self, attr))
            for key, attr in PARAMETER_KEYS.items()
        }
        data["quadrature"] = {key: getattr(self, attr) for key, attr in QUADRATURE_KEYS.items()}
        data["output"] = {key: getattr(self, attr) for key, attr in OUTPUT_KEYS.items()}
        data["grids"] = {k: list(v) for k, v in self.grids.items()}
        data["threads"] = self.threads
        data["strict"] = self.strict
        return data

    def dump(self, filename: str) -> None:
        """
        Save to YAML; refuses to overwrite an existing file.
        """
        path = Path(filename)
        if path.exists():
            raise FileExistsError(f"{filename} already exists")
        path.write_text(yaml.safe_dump(self.to_dict(), default_flow_style=False, sort_keys=False))
        logger.info(f"RunConfig saved: {filename}")

    def merged(self, overrides: Dict[str, Any]) -> "RunConfig":
        """copy with every non-None override applied (attribute names)"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ValidationError(f"unknown override {sorted(unknown)}", field=sorted(unknown)[0])
        return dataclasses.replace(self, **changes)

    def with_grid_values(self, values: Dict[str, Any]) -> "RunConfig":
        """copy with grid keys (YAML names) set to one tuple of values"""
        changes = {}
        for key, value in values.items():
            attr = PARAMETER_KEYS[key]
            changes[attr] = int(value) if attr in ("N", "j", "seed") else float(value)
        return dataclasses.replace(self, **changes)

    def validate(self) -> "RunConfig":
        """
        Check admissibility of every field before any computation.

        Raises:
            ValidationError: the field attribute names the offending parameter
        """
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}, expect one of {COMMANDS}", field="command")
        if self.command in ("verify", "sweep") and self.target not in get_allowed_targets():
            raise ValidationError(f"unknown target {self.target!r}, expect one of {get_allowed_targets()}", field="target")
        if self.sharpness_target not in get_allowed_sharpness_targets():
            raise ValidationError(
                f"unknown sharpness target {self.sharpness_target!r}, expect one of {get_allowed_sharpness_targets()}",
                field="sharpness_target",
            )
        if self.manifold not in get_allowed_manifolds():
            raise ValidationError(f"unknown manifold {self.manifold!r}, expect one of {get_allowed_manifolds()}", field="manifold")
        if self.pair not in get_allowed_pairs():
            raise ValidationError(f"unknown pair {self.pair!r}, expect one of {get_allowed_pairs()}", field="pair")
        if self.format is not None and self.format not in FORMATS:
            raise ValidationError(f"unknown format {self.format!r}, expect one of {FORMATS}", field="format")

        validate_dimension(self.N)
        PoincareWeight.of(self.N, self.lam)
        if self.j < -1:
            raise ValidationError(f"j must be >= -1, got {self.j}", field="j")
        low = [n for n in self.mode_list if n < self.j + 1]
        if low:
            raise ValidationError(f"modes {low} are below j+1 = {self.j + 1}", field="modes")
        if len(set(self.mode_list)) != len(self.mode_list):
            raise ValidationError(f"modes {self.mode_list} repeat a degree", field="modes")
        s0, s1 = self.support
        if not (0.0 < s0 < s1):
            raise ValidationError(f"support must satisfy 0 < s0 < s1, got {self.support}", field="support")
        if self.n_knots < 3:
            raise ValidationError(f"n_knots must be >= 3, got {self.n_knots}", field="n_knots")
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be > 0, got {self.kappa}", field="kappa")
        self.quadrature_spec()
        if self.levels < 1:
            raise ValidationError(f"levels must be >= 1, got {self.levels}", field="levels")
        if self.nodes < 2:
            raise ValidationError(f"nodes must be >= 2, got {self.nodes}", field="nodes")
        if self.threads is not None and self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}", field="threads")
        for key in self.grids:
            if key not in GRID_KEYS:
                raise ValidationError(f"cannot sweep over {key!r}, expect one of {GRID_KEYS}", field="grids")
        # swept keys interact (N with lambda, j with modes): check full tuples
        for point in grid_product(self.grids):
            self.with_grid_values(dict(point)).validate_point()
        return self

    def validate_point(self) -> None:
        """checks that depend on swept parameters"""
        validate_dimension(self.N)
        PoincareWeight.of(self.N, self.lam)
        if self.j < -1:
            raise ValidationError(f"j must be >= -1, got {self.j}", field="j")
        low = [n for n in self.mode_list if n < self.j + 1]
        if low:
            raise ValidationError(f"modes {low} are below j+1 = {self.j + 1}", field="modes")
        if not self.kappa > 0:
            raise ValidationError(f"kappa must be > 0, got {self.kappa}", field="kappa")
