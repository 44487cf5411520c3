"""Vector and Boolean hidden-variable models of Bell, Malus and HOM experiments."""

__version__ = "0.1.0"
