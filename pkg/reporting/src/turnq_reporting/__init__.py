from .plot import EvalPoint, FigureSpec, RunData, SchemaError, build_figure, plot_run

__version__ = "0.1.0"
