"""Positive rescalings that make a total family satisfy a lower frame bound."""

from .chain import CanonicalBasis, TailSpanChain, build_canonical_basis, compute_tail_chain
from .exceptions import LowerFrameError
from .family import GeneratorSpec, VectorFamily, generate_family, load_family, save_family
from .pipeline import PipelineConfig, ScalingCertificate, run_pipeline

__version__ = "0.1.0"
