"""
Radial meshes for the Galerkin discretization of the sharpness module.
"""

from typing import Optional

import numpy as np

from ..errors import ValidationError
from ..logging_config import get_logger

logger = get_logger(__name__)

MeshKinds = {
    "geometric": "r_i = r_min (r_max/r_min)^(i/M)",
    "uniform": "r_i = r_min + (r_max - r_min) i/M",
}


def get_allowed_kinds() -> list:
    """
    return allowed radial mesh kinds
    """
    return list(MeshKinds.keys())


def graded_mesh(r_min: float, r_max: float, M: int, kind: str = "geometric") -> np.ndarray:
    """
    M+1 strictly increasing nodes from r_min to r_max (both included).

    geometric grading concentrates nodes toward r = 0, where Hardy-type
    quotients live; it needs r_min > 0.

    Raises:
        ValidationError: unknown kind, M < 2, r_min >= r_max, or r_min <= 0
            for a geometric mesh
    """
    if kind not in MeshKinds:
        raise ValidationError(f"unknown mesh kind {kind!r}, expect one of {get_allowed_kinds()}", field="mesh")
    if M < 2:
        raise ValidationError(f"need at least 2 elements, got {M}", field="nodes")
    if not (0.0 <= r_min < r_max < np.inf):
        raise ValidationError(f"need 0 <= r_min < r_max < inf, got ({r_min}, {r_max})", field="rmin")
    if kind == "geometric":
        if r_min <= 0:
            raise ValidationError(f"geometric mesh needs r_min > 0, got {r_min}", field="rmin")
        nodes = np.geomspace(r_min, r_max, M + 1)
    else:
        nodes = np.linspace(r_min, r_max, M + 1)
    nodes[0], nodes[-1] = r_min, r_max
    if not np.all(np.diff(nodes) > 0):
        raise ValidationError(f"mesh on ({r_min}, {r_max}) with {M} elements is not strictly increasing", field="nodes")
    logger.debug(f"graded_mesh({kind}): {M} elements on ({r_min:g}, {r_max:g})")
    return nodes


def check_mesh(nodes, at_least: Optional[int] = 3) -> np.ndarray:
    """return nodes as a float array after checking strict monotonicity"""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < at_least:
        raise ValidationError(f"mesh needs at least {at_least} nodes", field="mesh")
    if not np.all(np.diff(nodes) > 0):
        raise ValidationError("mesh is not strictly increasing", field="mesh")
    return nodes
