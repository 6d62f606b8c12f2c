"""ciqlab: common idiosyncratic quantile factor laboratory."""

__version__ = "0.1.0"
