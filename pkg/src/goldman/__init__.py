"""Goldman twist flows on SU(2) representation varieties of nonorientable
surfaces and their orientation double covers."""

from .errors import (
    ArityMismatch,
    DegenerateElement,
    Inconclusive,
    NotInVariety,
    SamplerStuck,
    SpecMismatch,
    TraceMismatch,
)
from .su2 import LieVector, Su2Element
from .surfaces import SurfaceSpec
from .repvar import DoubleRepPoint, Fingerprint, RepPoint
from .flows import EndpointRule

__version__ = "0.1.0"
