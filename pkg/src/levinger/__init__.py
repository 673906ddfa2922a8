__name__ = "levinger"
__version__ = "0.1.0"
