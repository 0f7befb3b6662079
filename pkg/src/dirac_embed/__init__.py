"""Embedded eigenvalues of half-line Dirac operators in canonical form."""
from ._backend import BACKEND
from .constructors import (DEFAULT_C_AMP, BumpCertificateInputs, MultiAssembly, PieceSchedule,
                           assemble_multi, k_gap_estimate, make_bump, make_critical_staircase,
                           make_locked_coulomb, make_supercritical, schedule_pieces)
from .potential import (BoundaryAngle, EigenTarget, PotentialSegment, PotentialSpec,
                        SegmentKind, polar_to_pq)
from .prufer import (DirectTrajectory, PrueferTrajectory, integrate_direct,
                     integrate_prufer, prufer_rhs)
from .verify import (bump_certificate, check_no_eigenvalue_bound, critical_tail_series,
                     fit_decay_exponent, fit_oscillatory_constant, l2_tail_estimate)

__version__ = "0.1.0"
