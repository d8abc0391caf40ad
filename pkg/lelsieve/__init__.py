from lelsieve.entry import parse
from lelsieve.lattice import Sap, parse_sap
from lelsieve.ring import BigFloat, PiPoly
from lelsieve.sieve import evaluate, fraction_exact, fraction_numeric, sweep

__version__ = "0.1.0"

__all__ = [
    "BigFloat",
    "PiPoly",
    "Sap",
    "evaluate",
    "fraction_exact",
    "fraction_numeric",
    "parse",
    "parse_sap",
    "sweep",
]
