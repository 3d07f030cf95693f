"""Property testing on bounded-degree graphs: testers, partitions and hard instances."""

__version__ = "0.1.0"
