"""Functional data clustering through epigraph and hypograph indexes.

Curves are smoothed with a cubic B-spline basis, mapped to a small
multivariate feature matrix by the (modified) epigraph and hypograph
indexes of the curves and their derivatives, and clustered with ordinary
multivariate methods.
"""

from .curves import (FunctionalSample, Grid, BSplineBasis, SmoothedTriple,
                     default_num_basis, make_basis, smooth)
from .errors import DegeneratePair, InvalidArgument, NumericalFailure
from .indexes import (ComboSpec, DataSource, FeatureMatrix, IndexKind,
                      admissible, assemble_features, compute_index,
                      enumerate_combos)
from .metrics import (EvalReport, KSelection, fmeasure, purity, rand_index,
                      select_k, silhouette)
from .mvclust import Partition

__version__ = "0.1.0"
