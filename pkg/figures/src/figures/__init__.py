"""Figure rendering for dephasing-channel experiment CSVs."""

__version__ = "0.1.0"

from .render import (
    FIGURE_IDS,
    EmptyDataError,
    FigureRecipe,
    MissingColumnError,
    read_table,
    reference_dephasing_rate,
    render,
)
