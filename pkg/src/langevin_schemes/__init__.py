"""Langevin sampling discretizations with closed-form Gaussian oracles."""
from .gaussian_flows import SchemeKind, scheme_step, ula_bias, ula_limit
from .measures import (GaussianMeasure, gaussian_entropy, gaussian_kl, gaussian_w2,
                       relative_fisher_gaussian)
from .noise import NoiseStream
from .potentials import GaussianPotential, MixtureTarget, Potential
from .prox import ProxRequest, prox
from .samplers import (Ensemble, backward_flow_step, mixture_sla_step, run_chain, sla_step,
                       synchronous_coupling_run, ula_step)

__version__ = "0.1.0"
