"""Static detection of hidden hyperlinks in HTML pages."""

__version__ = "0.1.0"
