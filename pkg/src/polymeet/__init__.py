"""polymeet: exact simulator and verification harness for the Meeting problem
of anonymous asynchronous searchers in polygons with holes."""

__version__ = "0.1.0"
