"""Built-in named norms and norm pairs used by the regression suite and the CLI."""

from __future__ import annotations

from typing import Dict, List, Tuple

from .norms import NormExpr, parse_norm

NORM_TEXT: Dict[str, str] = {
    "weighted-l1-a": "lp(1, w=[2,1])",
    "weighted-l1-b": "lp(1, w=[1,2])",
    "q1": "quad([[3,0],[0,1]])",
    "q2": "quad([[1,0],[0,3]])",
    "q-sum": "sum(quad([[3,0],[0,1]]), quad([[1,0],[0,3]]))",
    "q-max": "max(quad([[3,0],[0,1]]), quad([[1,0],[0,3]]))",
    "euclid": "quad([[1,0],[0,1]])",
    "lp1": "lp(1)",
    "lp2": "lp(2)",
    "lp3": "lp(3)",
    "lp4": "lp(4)",
    "lpinf": "lp(inf)",
    "hexagon": "polygon([[1,0],[0.5,1],[-0.5,1],[-1,0],[-0.5,-1],[0.5,-1]])",
}

# pairs known to be angularly equivalent (both smooth and strictly convex, or
# sharing the same extreme rays)
EQUIVALENT_PAIRS: List[Tuple[str, str]] = [
    ("weighted-l1-a", "weighted-l1-b"),
    ("q1", "q2"),
    ("q1", "q-sum"),
    ("q2", "q-sum"),
    ("euclid", "lp2"),
]

# pairs known not to be angularly equivalent
NON_EQUIVALENT_PAIRS: List[Tuple[str, str]] = [
    ("lp1", "lpinf"),
    ("q1", "q-max"),
    ("lp2", "lp4"),
]


def norm(name: str) -> NormExpr:
    return parse_norm(NORM_TEXT[name])


def planar_norms() -> Dict[str, NormExpr]:
    return {k: parse_norm(v) for k, v in NORM_TEXT.items()}
