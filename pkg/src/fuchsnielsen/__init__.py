"""Deciding and certifying Nielsen (in)equivalence of standard generating
systems of Fuchsian groups: Fox calculus, cyclotomic group-ring arithmetic,
SL2 representations and a determinant invariant."""
from .cyclo import (ApproxRingElement, CycNumber, RingElement, det_division_free,
                    pi_injectivity_scan, pi_product)
from .errors import *  # noqa: F401,F403
from .invariant import (CertifiedReport, EtaRep, InvariantValue, build_eta,
                        certify_inequivalence, eval_eta, extract_r, invariant_product,
                        relator_annihilation_check, standard_lifts, verify_certificate)
from .presentation import (DecisionReport, FuchsianPresentation, NielsenCertificate,
                           StandardGenSys, classify_signature, criterion_decide,
                           is_exceptional, nielsen_certificate, parse_presentation, quotient,
                           rep_case, signature_type)
from .sl2rep import RepData, build_cyclic_faithful, build_quotient_rep, verify_rep
from .words import (FoxJacobian, FoxPolynomial, FreeWord, Invert, LeftMultiply, Permute,
                    RightMultiply, apply_nielsen, fox_derivative, jacobian, parse_word)

__version__ = "0.1.0"
