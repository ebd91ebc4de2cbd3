"""Experiment protocols: noise sweeps, model comparison, recovery, benchmarks.

Each function returns plain row dictionaries (one observation per row) so
the CLI can serialize them and tests can assert on them directly. Rows
carry their full parameter key, which makes result assembly order
independent and every score re-derivable by a direct library call.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, split, standardize
from .errors import GpbnetError
from .pdag import structure_distance, to_pdag
from .scoring import FamilyKey, ScoreCache, ScoreConfig, Scorer, cache_get_or_compute, family_test_log_loss
from .search import Dag, SearchConfig, hill_climb, total_score
from .synth import LINK_KINDS, SynthEdge, SynthSpec, synth_generate

log = logging.getLogger(__name__)

PAIR_MODELS = (
    ("indep", ()),
    ("true-direction", ((0, 1),)),
    ("reverse", ((1, 0),)),
)

STRUCTURES = {
    "chain": ((0, 1), (1, 2)),
    "fork": ((0, 1), (0, 2)),
    "collider": ((0, 2), (1, 2)),
}


@dataclass(frozen=True)
class HarnessConfig:
    scoring: ScoreConfig = field(default_factory=ScoreConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    m_train: int = 100
    m_test: int = 300
    seeds: tuple[int, ...] = tuple(range(20))


def _pair_data(function: str, noise: float, m_train: int, m_test: int, seed: int):
    """Standardized train/test for a two-variable generator X0 -> X1."""
    spec = SynthSpec(
        n=2,
        edges=(SynthEdge(0, 1, function),),
        noise_level=noise,
        n_samples=m_train + m_test,
        seed=seed,
    )
    data = synth_generate(spec)
    train = data.take_rows(range(m_train))
    test = data.take_rows(range(m_train, m_train + m_test))
    train_std, stz = standardize(train)
    return train_std, stz.apply(test)


def _model_scores(train, test, edges, scorer, cache):
    dag = Dag.from_edges(train.n_cols, edges)
    score = total_score(dag, train, scorer, cache)
    bound = scorer.bind(train)
    loss = sum(
        family_test_log_loss(
            cache_get_or_compute(cache, FamilyKey.make(v, dag.parents_of(v)), bound),
            train,
            test,
            scorer.config,
        )
        for v in range(train.n_cols)
    )
    return score, loss


def noise_sweep(
    functions=LINK_KINDS,
    noise_grid=(0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6),
    seeds=tuple(range(10)),
    method: str = "gp",
    config: HarnessConfig = HarnessConfig(),
) -> list[dict]:
    """Score the three two-variable models across functions x noise x seeds."""
    rows = []
    scorer = Scorer(method, config.scoring)
    for function in functions:
        for noise in noise_grid:
            for seed in seeds:
                try:
                    train, test = _pair_data(function, noise, config.m_train, config.m_test, seed)
                except GpbnetError as exc:
                    for model, _ in PAIR_MODELS:
                        base = dict(function=function, noise=noise, model=model, seed=seed)
                        rows.append(_error_row(base, exc, ("score", "test_log_loss")))
                    continue
                cache = ScoreCache()
                for model, edges in PAIR_MODELS:
                    base = dict(function=function, noise=noise, model=model, seed=seed)
                    try:
                        score, loss = _model_scores(train, test, edges, scorer, cache)
                        rows.append(dict(base, score=score, test_log_loss=loss, error=""))
                    except GpbnetError as exc:
                        rows.append(_error_row(base, exc, ("score", "test_log_loss")))
    return rows


def _error_row(base: dict, exc: Exception, blank_fields: tuple) -> dict:
    log.warning("experiment cell failed: %s (%s)", base, exc)
    row = dict(base, **{f: "" for f in blank_fields})
    row["error"] = str(exc)
    return row


def model_comparison(
    functions=LINK_KINDS,
    sizes=(20, 50, 100),
    seeds=tuple(range(10)),
    methods=("gp", "linear_gaussian", "kernel"),
    noise: float = 0.4,
    config: HarnessConfig = HarnessConfig(),
) -> list[dict]:
    """Dependent-vs-independent test log-loss gap per scorer and train size."""
    rows = []
    max_size = max(sizes)
    for function in functions:
        for seed in seeds:
            spec = SynthSpec(
                n=2,
                edges=(SynthEdge(0, 1, function),),
                noise_level=noise,
                n_samples=max_size + config.m_test,
                seed=seed,
            )
            data = synth_generate(spec)
            test_raw = data.take_rows(range(max_size, max_size + config.m_test))
            for size in sizes:
                try:
                    train, stz = standardize(data.take_rows(range(size)))
                    test = stz.apply(test_raw)
                except GpbnetError as exc:
                    for method in methods:
                        base = dict(function=function, size=size, scorer=method, seed=seed)
                        rows.append(
                            _error_row(base, exc, ("dependent_loss", "independent_loss", "ratio"))
                        )
                    continue
                for method in methods:
                    base = dict(function=function, size=size, scorer=method, seed=seed)
                    scorer = Scorer(method, config.scoring)
                    cache = ScoreCache()
                    try:
                        _, dep_loss = _model_scores(train, test, ((0, 1),), scorer, cache)
                        _, ind_loss = _model_scores(train, test, (), scorer, cache)
                        rows.append(
                            dict(
                                base,
                                dependent_loss=dep_loss,
                                independent_loss=ind_loss,
                                ratio=dep_loss - ind_loss,
                                error="",
                            )
                        )
                    except GpbnetError as exc:
                        rows.append(
                            _error_row(base, exc, ("dependent_loss", "independent_loss", "ratio"))
                        )
    return rows


def _structure_spec(structure: str, link: str, m: int, noise: float, seed: int) -> SynthSpec:
    arcs = STRUCTURES[structure]
    if link == "mixed":
        kinds = ["quadratic", "sinusoidal"]
        edges = tuple(SynthEdge(p, c, kinds[i % 2]) for i, (p, c) in enumerate(arcs))
    else:
        edges = tuple(SynthEdge(p, c, link) for p, c in arcs)
    return SynthSpec(n=3, edges=edges, noise_level=noise, n_samples=m, seed=seed)


def structure_recovery(
    structures=("chain",),
    links=("quadratic",),
    m_values=(100,),
    seeds=tuple(range(20)),
    methods=("gp", "linear_gaussian", "kernel"),
    noise: float = 0.4,
    config: HarnessConfig = HarnessConfig(),
) -> list[dict]:
    """Learn three-variable networks and compare against the generating PDAG."""
    rows = []
    for structure in structures:
        for link in links:
            for m in m_values:
                for seed in seeds:
                    spec = _structure_spec(structure, link, m, noise, seed)
                    data, _ = standardize(synth_generate(spec))
                    truth = Dag.from_edges(3, STRUCTURES[structure])
                    truth_pdag = to_pdag(truth)
                    for method in methods:
                        base = dict(structure=structure, link=link, m=m, scorer=method, seed=seed)
                        try:
                            learned, _ = hill_climb(data, Scorer(method, config.scoring), config.search)
                        except GpbnetError as exc:
                            rows.append(
                                dict(
                                    base,
                                    missing="", extra="", misoriented="",
                                    arcs_true=len(truth.edges), arcs_correct="",
                                    error=str(exc),
                                )
                            )
                            continue
                        dist = structure_distance(to_pdag(learned), truth_pdag)
                        correct = sum(1 for arc in truth.edges if arc in learned.edges)
                        rows.append(
                            dict(
                                base,
                                missing=dist.missing,
                                extra=dist.extra,
                                misoriented=dist.misoriented,
                                arcs_true=len(truth.edges),
                                arcs_correct=correct,
                                error="",
                            )
                        )
    return rows


def _learned_families(dag: Dag, train: Dataset, scorer: Scorer, cache: ScoreCache):
    bound = scorer.bind(train)
    return [
        cache_get_or_compute(cache, FamilyKey.make(v, dag.parents_of(v)), bound)
        for v in range(dag.n)
    ]


def benchmark(
    data: Dataset,
    dataset_name: str,
    sizes=(20, 50, 100),
    test_count: int = 100,
    seeds=(0,),
    methods=("gp", "linear_gaussian", "kernel"),
    config: HarnessConfig = HarnessConfig(),
) -> list[dict]:
    """Learn on permuted train prefixes, report mean joint test log-likelihood."""
    rows = []
    for seed in seeds:
        pool, test_raw = split(data, test_count, seed)
        for size in sizes:
            if size > pool.n_rows:
                raise GpbnetError(f"size {size} exceeds the {pool.n_rows} available train rows")
            for method in methods:
                base = dict(dataset=dataset_name, size=size, scorer=method, seed=seed)
                started = time.perf_counter()
                try:
                    train, stz = standardize(pool.take_rows(range(size)))
                    test = stz.apply(test_raw)
                    scorer = Scorer(method, config.scoring)
                    cache = ScoreCache()
                    learned, _ = hill_climb(train, scorer, config.search, cache)
                    loss = sum(
                        family_test_log_loss(fs, train, test, config.scoring)
                        for fs in _learned_families(learned, train, scorer, cache)
                    )
                    rows.append(
                        dict(base, mean_test_loglik=loss, n_edges=len(learned.edges), error="")
                    )
                except GpbnetError as exc:
                    rows.append(dict(base, mean_test_loglik="", n_edges="", error=str(exc)))
                log.info(
                    "benchmark cell %s finished in %.2fs", base, time.perf_counter() - started
                )
    return rows


def predict_profile(
    data: Dataset,
    child: int,
    parent: int,
    grid_size: int = 200,
    padding: float = 2.0,
    config: HarnessConfig = HarnessConfig(),
) -> list[dict]:
    """Predictive mean/sd of a one-parent GP family over an input grid."""
    from .gp import GpPosterior, predict
    from .scoring import gp_family_score

    data_std, _ = standardize(data)
    fs = gp_family_score(child, (parent,), data_std, config.scoring)
    x = data_std.values[:, child]
    u = data_std.values[:, [parent]]
    posterior = GpPosterior.fit(x, u, fs.fitted)
    lo, hi = float(u.min()) - padding, float(u.max()) + padding
    rows = []
    for u_star in np.linspace(lo, hi, grid_size):
        density = predict(posterior, [u_star])
        rows.append(
            dict(u=float(u_star), mean=density.mean, sd=float(np.sqrt(density.variance)))
        )
    return rows
