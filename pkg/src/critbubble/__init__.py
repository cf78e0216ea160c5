from .bubble import Bubble, CoronParams, standard_bubble
from .quad import QuadSpec, RadialFn
from .specfn import DimPair

__version__ = "0.3.0"

__all__ = ("Bubble", "CoronParams", "DimPair", "QuadSpec", "RadialFn", "standard_bubble")
