import itertools
from typing import Any, Dict, List, Sequence, Tuple

from ..logging_config import get_logger

logger = get_logger(__name__)


def grid_product(grids: Dict[str, Sequence[Any]]) -> List[Tuple[Tuple[str, Any], ...]]:
    """
    Cartesian product of parameter grids, lexicographic in the declared
    key order (the last key varies fastest).

    An empty mapping, or any empty grid, gives no tuples.
    """
    if not grids:
        return []
    keys = list(grids.keys())
    tuples = [tuple(zip(keys, values)) for values in itertools.product(*(grids[k] for k in keys))]
    logger.debug(f"grid_product over {keys}: {len(tuples)} tuples")
    return tuples
