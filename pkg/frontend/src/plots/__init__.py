"""Figure regeneration for purification sweep and trajectory CSV files."""

from .figures import (
    KINDS,
    RATIO_VS_M_BY_D,
    RATIO_VS_M_BY_P,
    ZENO_TRAJ,
    FigureSpec,
    render,
)

__all__ = [
    "KINDS",
    "RATIO_VS_M_BY_D",
    "RATIO_VS_M_BY_P",
    "ZENO_TRAJ",
    "FigureSpec",
    "render",
]
