"""Run any of the filters over a measurement sequence."""

from dataclasses import dataclass
from typing import List

import numpy as np

from . import conventional, sqrt
from .errors import FilterError, LambdaZero, StepFailure
from .linalg import solve_lower
from .model import CovFilterState, KernelSpec, SqrtFilterState, StepDiagnostics

KF = "kf"
MCCKF = "mcckf"
IMCCKF = "imcckf"
MCCKF_APRIORI = "mcckf-apriori"
IMCCKF_APRIORI = "imcckf-apriori"
SR_IMCCKF = "sr-imcckf"
ESR_IMCCKF = "esr-imcckf"

FILTER_KINDS = (KF, MCCKF, IMCCKF, MCCKF_APRIORI, IMCCKF_APRIORI, SR_IMCCKF, ESR_IMCCKF)
POSTERIORI_KINDS = (MCCKF, IMCCKF)
SQRT_KINDS = (SR_IMCCKF, ESR_IMCCKF)
CONVENTIONAL_KINDS = (KF, MCCKF, IMCCKF, MCCKF_APRIORI, IMCCKF_APRIORI)
IMCC_APRIORI_KINDS = (IMCCKF_APRIORI, SR_IMCCKF, ESR_IMCCKF)


@dataclass
class FilterRun:
    """Aligned estimate sequences: ``prior[k]`` is x(k|k-1), ``posterior[k]`` is x(k|k)."""

    kind: str
    prior: np.ndarray
    posterior: np.ndarray
    states: list
    diagnostics: List[StepDiagnostics]

    @property
    def lambdas(self):
        return np.array([d.lam for d in self.diagnostics])


def initial_state(kind, model):
    if kind in SQRT_KINDS:
        S = model.P0_sqrt.copy()
        z = solve_lower(S, model.x0) if kind == ESR_IMCCKF else None
        return SqrtFilterState(model.x0.copy(), S, 0, z=z)
    return CovFilterState(model.x0.copy(), model.P0.copy(), 0)


def _mcckf_apriori(state, y, model, kernel):
    try:
        return conventional.mcckf_apriori_step(state, y, model, kernel)
    except LambdaZero:
        return conventional.predict_only_step(state, y, model)


def _stepper(kind):
    return {
        KF: lambda s, y, mdl, ker: conventional.kf_apriori_step(s, y, mdl),
        MCCKF_APRIORI: _mcckf_apriori,
        IMCCKF_APRIORI: conventional.imcckf_apriori_step,
        SR_IMCCKF: sqrt.sr_imcckf_step,
        ESR_IMCCKF: sqrt.esr_imcckf_step,
    }[kind]


def iter_filter(kind, model, measurements, kernel=None):
    """Yield ``(prior_estimate, state_after_step, diagnostics)`` one step at a time.

    Failures are re-raised as ``StepFailure`` carrying the step index.
    """
    if kind not in FILTER_KINDS:
        raise ValueError(f"unknown filter kind {kind!r}; choose from {', '.join(FILTER_KINDS)}")
    kernel = kernel or KernelSpec()
    state = initial_state(kind, model)
    if kind in POSTERIORI_KINDS:
        update = (
            conventional.mcckf_measurement_update
            if kind == MCCKF
            else conventional.imcckf_measurement_update
        )
    else:
        step = _stepper(kind)

    for k, y in enumerate(measurements):
        try:
            if kind in POSTERIORI_KINDS:
                prior = state if k == 0 else conventional.time_update(state, model)
                x_prior = prior.x
                state, diag = update(prior, y, model, kernel)
            else:
                x_prior = state.x
                state, diag = step(state, y, model, kernel)
        except FilterError as exc:
            raise StepFailure(exc, k, filter_kind=kind) from exc
        yield x_prior, state, diag


def run_filter(kind, model, measurements, kernel=None):
    """Fold one filter over ``measurements`` (a sequence of m-vectors).

    Every family starts from ``x0``/``P0`` as the prior for the first
    measurement; a posteriori filters skip the time update on that first step.
    """
    measurements = np.atleast_2d(np.asarray(measurements, dtype=float))
    if measurements.size == 0 or measurements.shape[0] == 0:
        raise ValueError("need at least one measurement")
    if measurements.shape[1] != model.m:
        raise ValueError(f"measurements have dimension {measurements.shape[1]}, model expects {model.m}")
    if not np.all(np.isfinite(measurements)):
        raise ValueError("measurements contain non-finite values")

    priors, posts, states, diags = [], [], [], []
    for x_prior, state, diag in iter_filter(kind, model, measurements, kernel):
        priors.append(x_prior)
        posts.append(diag.filtered)
        states.append(state)
        diags.append(diag)
    return FilterRun(kind, np.array(priors), np.array(posts), states, diags)
