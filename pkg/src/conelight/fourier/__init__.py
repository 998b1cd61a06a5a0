from .types import Amplitude, LightlikeMomentum, transverse_project
from .quadrature import QuadratureConfig, oracle_quadrature

__all__ = ["Amplitude", "LightlikeMomentum", "transverse_project", "QuadratureConfig", "oracle_quadrature"]
