"""LOO-CV forward search with order-statistic bias correction and stopping rules.

Each step adds the predictor with the best LOO elpd among the remaining
candidates. Because every step is an argmax over noisy estimates, the raw
cumulative path overstates predictive gains; ``correct_path`` subtracts the
per-step bias estimate wherever the step's gain sits below the expected
maximum of equally-useless candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .conjlm import Dataset, NigPrior, elpd_loo_exact, fit, log_pred_dataset
from .errors import (
    EmptyCandidateSet,
    IncompletePath,
    MissingCandidateDiffs,
    SchemaMismatch,
)
from .orderstats import blom_max, halfnormal_sigma
from .psisloo import ElpdEstimate, elpd_se


@dataclass(frozen=True)
class SearchStep:
    """One forward-search step (model size = step index + 1)."""

    predictor_added: int
    candidates_evaluated: int
    raw_diff: float
    elpd_after: float
    se_diff: float
    corrected_diff: float
    corrected_elpd_after: float
    candidate_diffs: np.ndarray | None = None
    candidate_ses: np.ndarray | None = None
    pointwise: np.ndarray | None = None
    threshold_at_step: float = 0.0
    bias_at_step: float = 0.0
    test_mlpd_after: float | None = None
    post_bulge: bool = False


@dataclass(frozen=True)
class SearchPath:
    """Forward-search trajectory from the intercept-only model."""

    steps: tuple[SearchStep, ...]
    base_elpd: float
    base_pointwise: np.ndarray
    data: Dataset
    prior: NigPrior
    max_size: int
    n_predictors: int
    multiplier: float | None = None
    alpha: float | None = None
    test_mlpd_base: float | None = None
    reference_mlpd: float | None = None

    @property
    def n_obs(self) -> int:
        return self.data.n

    def sizes(self) -> np.ndarray:
        return np.arange(len(self.steps) + 1)

    def raw_elpds(self) -> np.ndarray:
        return np.array([self.base_elpd] + [s.elpd_after for s in self.steps])

    def corrected_elpds(self) -> np.ndarray:
        return np.array(
            [self.base_elpd] + [s.corrected_elpd_after for s in self.steps]
        )

    def test_mlpds(self) -> np.ndarray | None:
        if self.test_mlpd_base is None:
            return None
        return np.array(
            [self.test_mlpd_base] + [s.test_mlpd_after for s in self.steps]
        )

    def predictors(self) -> list[int]:
        return [s.predictor_added for s in self.steps]

    def to_rows(self) -> list[dict]:
        """Long-format rows (one per model size, size 0 included)."""
        n = self.n_obs
        rows = [
            {
                "size": 0,
                "predictor_added": None,
                "candidates_evaluated": None,
                "raw_diff": 0.0,
                "corrected_diff": 0.0,
                "threshold": 0.0,
                "bias": 0.0,
                "elpd": self.base_elpd,
                "corrected_elpd": self.base_elpd,
                "mlpd": self.base_elpd / n,
                "corrected_mlpd": self.base_elpd / n,
                "test_mlpd": self.test_mlpd_base,
                "post_bulge": False,
            }
        ]
        for k, s in enumerate(self.steps, start=1):
            rows.append(
                {
                    "size": k,
                    "predictor_added": s.predictor_added,
                    "candidates_evaluated": s.candidates_evaluated,
                    "raw_diff": s.raw_diff,
                    "corrected_diff": s.corrected_diff,
                    "threshold": s.threshold_at_step,
                    "bias": s.bias_at_step,
                    "elpd": s.elpd_after,
                    "corrected_elpd": s.corrected_elpd_after,
                    "mlpd": s.elpd_after / n,
                    "corrected_mlpd": s.corrected_elpd_after / n,
                    "test_mlpd": s.test_mlpd_after,
                    "post_bulge": s.post_bulge,
                }
            )
        return rows


@dataclass(frozen=True)
class StopVerdicts:
    """Model sizes selected by each stopping rule."""

    bulge_size: int
    two_sigma_size: int
    corrected_max_size: int
    two_sigma_delta_size: int
    three_sigma_delta_size: int

    def to_dict(self) -> dict:
        return {
            "bulge_size": self.bulge_size,
            "two_sigma_size": self.two_sigma_size,
            "corrected_max_size": self.corrected_max_size,
            "two_sigma_delta_size": self.two_sigma_delta_size,
            "three_sigma_delta_size": self.three_sigma_delta_size,
        }


def forward_search(
    data: Dataset,
    prior: NigPrior,
    max_size: int,
    scorer=None,
) -> SearchPath:
    """Greedy forward search maximizing the LOO elpd point estimate.

    ``scorer(cols)`` must return an ElpdEstimate for the model on predictor
    subset ``cols``; the default scores with exact conjugate LOO. Ties break
    to the lowest predictor index.
    """
    p = data.p
    if max_size > p:
        raise EmptyCandidateSet(f"max_size {max_size} exceeds {p} predictors")
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if scorer is None:
        scorer = lambda cols: elpd_loo_exact(data.subset(cols), prior)

    base = scorer(())
    prev = base
    current: list[int] = []
    steps: list[SearchStep] = []
    corrected_diffs: list[float] = []
    for _ in range(max_size):
        cands = [j for j in range(p) if j not in current]
        ests = [scorer(tuple(current) + (j,)) for j in cands]
        diffs = np.array([e.estimate - prev.estimate for e in ests])
        ses = np.array(
            [elpd_se(e.pointwise - prev.pointwise) for e in ests]
        )
        best = int(np.argmax(diffs))
        choice = ests[best]
        corrected_diffs.append(float(diffs[best]))
        steps.append(
            SearchStep(
                predictor_added=cands[best],
                candidates_evaluated=len(cands),
                raw_diff=float(diffs[best]),
                elpd_after=choice.estimate,
                se_diff=float(ses[best]),
                corrected_diff=float(diffs[best]),
                corrected_elpd_after=math.fsum([base.estimate] + corrected_diffs),
                candidate_diffs=diffs,
                candidate_ses=ses,
                pointwise=choice.pointwise,
            )
        )
        current.append(cands[best])
        prev = choice

    return SearchPath(
        steps=tuple(steps),
        base_elpd=base.estimate,
        base_pointwise=base.pointwise,
        data=data,
        prior=prior,
        max_size=max_size,
        n_predictors=p,
    )


def correct_path(
    path: SearchPath,
    multiplier: float = 1.5,
    alpha: float = 0.5,
    k_convention: str = "size",
) -> SearchPath:
    """Apply the order-statistic bias correction along a search path.

    At each step the threshold is ``blom_max(K, alpha) * sigma_hat`` with
    sigma_hat estimated from that step's candidate diffs; gains below the
    threshold are reduced by ``multiplier * threshold``. Steps past the
    raw-path bulge are left uncorrected and flagged, since beyond it
    over-fitting is already evident.

    ``k_convention`` picks what K counts: ``"size"`` (default) uses the
    model size, so the allowance grows as selection decisions compound and
    the first step is never corrected; ``"candidates"`` uses the number of
    candidates evaluated at the step; ``"constant"`` uses the total
    predictor count. With few predictors and strongly correlated signal,
    the candidate-count conventions inflate the threshold past genuine
    gains (several near-duplicate winners dominate sigma_hat) and wrongly
    cancel real signal, so the size convention is the default.
    """
    if k_convention not in ("size", "candidates", "constant"):
        raise ValueError("k_convention must be 'size', 'candidates' or 'constant'")
    if any(s.candidate_diffs is None for s in path.steps):
        raise MissingCandidateDiffs(
            "path steps lack candidate diffs; rerun forward_search"
        )
    raw = path.raw_elpds()
    bulge_size = int(np.argmax(raw))

    new_steps: list[SearchStep] = []
    corrected_diffs: list[float] = []
    for idx, s in enumerate(path.steps):
        size = idx + 1
        if k_convention == "size":
            k_step = size
        elif k_convention == "candidates":
            k_step = s.candidates_evaluated
        else:
            k_step = path.n_predictors
        if k_step >= 2 and s.candidate_diffs.size >= 2:
            sigma_hat = halfnormal_sigma(s.candidate_diffs).sigma_hat
        else:
            sigma_hat = 0.0
        thr = blom_max(k_step, alpha) * sigma_hat
        bias = multiplier * thr
        post_bulge = size > bulge_size
        if post_bulge or abs(s.raw_diff) >= thr:
            corrected = s.raw_diff
        else:
            corrected = s.raw_diff - bias
        corrected_diffs.append(corrected)
        new_steps.append(
            replace(
                s,
                corrected_diff=corrected,
                corrected_elpd_after=math.fsum([path.base_elpd] + corrected_diffs),
                threshold_at_step=float(thr),
                bias_at_step=float(bias),
                post_bulge=post_bulge,
            )
        )
    return replace(
        path, steps=tuple(new_steps), multiplier=multiplier, alpha=alpha
    )


def stopping_rules(path: SearchPath) -> StopVerdicts:
    """Evaluate all stopping rules on a completed path.

    bulge: argmax of the raw cumulative elpd. 2-sigma: smallest size whose
    raw elpd is within two paired standard errors of the bulge. corrected
    max: argmax of the corrected path. The incremental sigma-delta rules
    stop at the first size where no candidate's gain clears m * se(gain).
    """
    if len(path.steps) < path.max_size:
        raise IncompletePath(
            f"path has {len(path.steps)} steps, expected {path.max_size}"
        )
    raw = path.raw_elpds()
    bulge_size = int(np.argmax(raw))
    corrected_max_size = int(np.argmax(path.corrected_elpds()))

    pointwise = [path.base_pointwise] + [s.pointwise for s in path.steps]
    if any(pw is None for pw in pointwise):
        raise MissingCandidateDiffs("path steps lack pointwise elpds")
    bulge_pw = pointwise[bulge_size]
    two_sigma_size = bulge_size
    for size in range(bulge_size + 1):
        se = 0.0 if size == bulge_size else elpd_se(pointwise[size] - bulge_pw)
        if raw[size] >= raw[bulge_size] - 2.0 * se:
            two_sigma_size = size
            break

    def first_stop(m: float) -> int:
        for idx, s in enumerate(path.steps):
            if s.candidate_diffs is None:
                raise MissingCandidateDiffs("incremental rules need candidate diffs")
            if not np.any(s.candidate_diffs - m * s.candidate_ses >= 0.0):
                return idx
        return len(path.steps)

    return StopVerdicts(
        bulge_size=bulge_size,
        two_sigma_size=two_sigma_size,
        corrected_max_size=corrected_max_size,
        two_sigma_delta_size=first_stop(2.0),
        three_sigma_delta_size=first_stop(3.0),
    )


def evaluate_test(path: SearchPath, test_data: Dataset) -> SearchPath:
    """Fill per-size test mlpd by refitting each step's model on full training data."""
    if test_data.p != path.data.p:
        raise SchemaMismatch(
            f"test data has {test_data.p} predictors, training had {path.data.p}"
        )
    cols: list[int] = []
    base_fit = fit(path.data.subset(()), path.prior)
    base_mlpd = float(np.mean(log_pred_dataset(base_fit, test_data.subset(()))))
    new_steps = []
    for s in path.steps:
        cols.append(s.predictor_added)
        f = fit(path.data.subset(cols), path.prior)
        m = float(np.mean(log_pred_dataset(f, test_data.subset(cols))))
        new_steps.append(replace(s, test_mlpd_after=m))
    return replace(path, steps=tuple(new_steps), test_mlpd_base=base_mlpd)
