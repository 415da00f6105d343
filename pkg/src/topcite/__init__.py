"""topcite: predict whether a newly published paper will rank in the top P%
of its journal cohort by accumulated citations Y years after publication.

Two prediction routes share one corpus, label, and evaluation pipeline:
supervised classification over graph/text embeddings, and retrieval-
augmented LLM prompting with a deterministic offline mock.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
