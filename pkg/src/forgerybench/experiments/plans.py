"""Experiment plan files, job expansion and plan execution.

A plan is a ``key: value`` text file::

    set: SET2_CROSS
    methods: DUA, ALAHMADI        (or "all")
    train: casia1, casia2, micc2000
    seed: 42
    c_grid: 0.1, 1, 10

Keys: ``set``, ``methods``, ``train``, ``test``, ``seed``, ``split``,
``per_source`` (``n_p/n_t``), ``repeats``, ``subsample`` (``declared`` or
``full``), ``kernel`` and the grid keys ``c_grid``, ``gamma_grid``,
``degree_grid``, ``folds``, ``coef0``, ``tol``, ``max_epochs``.

Cross-dataset (SET2) plans never list test sets: each training set is paired
with every other registered standard dataset.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..classifier import GAMMA_INV_DIM, GridSearchConfig, KernelKind
from ..datasets import DatasetManifest, Registry, apply_declared_subsample
from ..errors import PlanInvariantViolation, PlanParseError, WildFlagViolation
from ..features import Method
from .report import SET_IDS, EvaluationReport
from .runners import (
    DEFAULT_SPLIT,
    FeatureCache,
    check_wild_flags,
    run_amalgam,
    run_cross,
    run_same_dataset,
)

GRID_KEYS = ("c_grid", "gamma_grid", "degree_grid", "folds", "coef0", "tol", "max_epochs")
PLAN_KEYS = ("set", "methods", "train", "test", "seed", "split", "per_source", "repeats",
             "subsample", "kernel") + GRID_KEYS
DEFAULT_PER_SOURCE = {"SET1_AMALGAM": (100, 100), "SET3_AMALGAM": (150, 150)}


@dataclass(frozen=True)
class ExperimentPlan:
    set_id: str
    methods: tuple = tuple(Method)
    train: tuple = ()
    test: tuple | None = None
    seed: int = 42
    split_fraction: float = DEFAULT_SPLIT
    per_source: tuple | None = None
    repeats: int = 3
    grid: GridSearchConfig = field(default_factory=GridSearchConfig)
    use_subsample: bool = True
    kernel: KernelKind | None = None

    def __post_init__(self):
        if self.set_id not in SET_IDS:
            raise PlanInvariantViolation(f"unknown set {self.set_id!r}; expected one of {SET_IDS}")
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))
        if not self.methods:
            raise PlanInvariantViolation("plan lists no methods")
        object.__setattr__(self, "train", tuple(self.train))
        if self.test is not None:
            object.__setattr__(self, "test", tuple(self.test))
        if self.set_id == "SET2_CROSS" and self.test is not None:
            raise PlanInvariantViolation(
                "SET2 test sets are every registered standard dataset except the train set; "
                "remove the 'test' key")
        if not 0.0 < self.split_fraction < 1.0:
            raise PlanInvariantViolation("split must be in (0, 1)")
        if self.repeats < 1:
            raise PlanInvariantViolation("repeats must be >= 1")

    @property
    def amalgam(self) -> bool:
        return self.set_id.endswith("_AMALGAM")

    def describe(self) -> list[str]:
        g = self.grid
        lines = [
            f"set: {self.set_id}",
            f"methods: {', '.join(m.value for m in self.methods)}",
            f"seed: {self.seed}",
            f"grid: C={list(g.c_grid)} gamma={list(g.gamma_grid)} degree={list(g.degree_grid)} "
            f"folds={g.folds} coef0={g.coef0:g} tol={g.tol:g}",
        ]
        if self.set_id in ("SET1_SAME",) or self.amalgam:
            lines.append(f"split: {self.split_fraction:g} train / "
                         f"{1 - self.split_fraction:g} test (stratified)")
        if self.amalgam:
            seeds = [self.seed + k for k in range(self.repeats)]
            lines.append(f"repeats: {self.repeats} (seeds {', '.join(map(str, seeds))})")
        return lines


@dataclass(frozen=True)
class Job:
    set_id: str
    method: Method
    train: str
    test: str

    def __str__(self):
        return f"{self.set_id} {self.method.value} {self.train} -> {self.test}"


# ---------------------------------------------------------------- parsing


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


def _number_list(value, conv, key, lineno, path):
    try:
        return tuple(conv(v) for v in _split_list(value))
    except ValueError:
        raise PlanParseError(f"bad value for {key}: {value!r}", lineno, path) from None


def _gamma(v: str):
    return GAMMA_INV_DIM if v == GAMMA_INV_DIM else float(v)


def _read_pairs(text: str, path=None, allowed=PLAN_KEYS) -> dict[str, tuple[str, int]]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise PlanParseError(f"expected 'key: value', got {raw.strip()!r}", lineno, path)
        key, value = (s.strip() for s in line.split(":", 1))
        key = key.lower()
        if key not in allowed:
            raise PlanParseError(f"unknown key {key!r}", lineno, path)
        if key in pairs:
            raise PlanParseError(f"duplicate key {key!r}", lineno, path)
        pairs[key] = (value, lineno)
    return pairs


def grid_from_pairs(pairs, base: GridSearchConfig = GridSearchConfig(), path=None
                    ) -> GridSearchConfig:
    changes = {}
    convs = {"c_grid": (float, True), "gamma_grid": (_gamma, True), "degree_grid": (int, True),
             "folds": (int, False), "coef0": (float, False), "tol": (float, False),
             "max_epochs": (int, False)}
    for key, (conv, is_list) in convs.items():
        if key not in pairs:
            continue
        value, lineno = pairs[key]
        vals = _number_list(value, conv, key, lineno, path)
        if not is_list and len(vals) != 1:
            raise PlanParseError(f"{key} takes a single value", lineno, path)
        changes[key] = vals if is_list else vals[0]
    try:
        return replace(base, **changes)
    except ValueError as exc:
        line = min((pairs[k][1] for k in changes), default=None)
        raise PlanParseError(str(exc), line, path) from None


def parse_grid_file(path: str | os.PathLike, base: GridSearchConfig = GridSearchConfig()
                    ) -> GridSearchConfig:
    """A grid override file uses the plan syntax restricted to grid keys."""
    text = Path(path).read_text(encoding="utf-8")
    return grid_from_pairs(_read_pairs(text, path, GRID_KEYS), base, path)


def parse_plan(text: str, path=None, grid: GridSearchConfig | None = None,
               default_seed: int = 42) -> ExperimentPlan:
    pairs = _read_pairs(text, path)
    if "set" not in pairs:
        raise PlanParseError("plan has no 'set' key", None, path)

    def get(key, conv, default):
        if key not in pairs:
            return default
        value, lineno = pairs[key]
        try:
            return conv(value)
        except (ValueError, KeyError) as exc:
            raise PlanParseError(f"bad value for {key}: {exc}", lineno, path) from None

    def methods(v):
        return tuple(Method) if v.strip().lower() == "all" else tuple(
            Method.parse(m) for m in _split_list(v))

    def pair(v):
        a, b = v.split("/")
        return int(a), int(b)

    def subsample(v):
        if v not in ("declared", "full"):
            raise ValueError("expected 'declared' or 'full'")
        return v == "declared"

    def test_list(v):
        return None if v.strip() == "*" else tuple(_split_list(v))

    set_value, set_line = pairs["set"]
    try:
        return ExperimentPlan(
            set_id=set_value.upper(),
            methods=get("methods", methods, tuple(Method)),
            train=get("train", lambda v: tuple(_split_list(v)), ()),
            test=get("test", test_list, None),
            seed=get("seed", int, default_seed),
            split_fraction=get("split", float, DEFAULT_SPLIT),
            per_source=get("per_source", pair, None),
            repeats=get("repeats", int, 3),
            grid=grid_from_pairs(pairs, grid or GridSearchConfig(), path),
            use_subsample=get("subsample", subsample, True),
            kernel=get("kernel", lambda v: KernelKind(v.strip().upper()), None),
        )
    except PlanInvariantViolation as exc:
        raise PlanParseError(str(exc), set_line, path) from None


def load_plan(path: str | os.PathLike, grid: GridSearchConfig | None = None,
              default_seed: int = 42) -> ExperimentPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"), path=path, grid=grid,
                      default_seed=default_seed)


# ---------------------------------------------------------------- expansion


def _sources(plan: ExperimentPlan, registry: Registry) -> list[DatasetManifest]:
    if plan.train:
        return [registry[d] for d in plan.train]
    pool = registry.wild() if plan.set_id == "SET3_AMALGAM" else registry.standard()
    if not pool:
        raise PlanInvariantViolation(f"{plan.set_id}: registry has no suitable source datasets")
    return pool


def _amalgam_name(sources) -> str:
    return "amalgam(" + "+".join(s.id for s in sources) + ")"


def resolve_targets(plan: ExperimentPlan, registry: Registry) -> list[tuple[str, list[str]]]:
    """``[(train_id, [test_ids])]`` after validating the plan against the registry."""
    if plan.amalgam:
        sources = _sources(plan, registry)
        want_wild = plan.set_id == "SET3_AMALGAM"
        for s in sources:
            if s.in_the_wild != want_wild:
                raise WildFlagViolation(
                    f"{plan.set_id} source {s.id} has wild={'yes' if s.in_the_wild else 'no'}")
        name = _amalgam_name(sources)
        return [(name, [name])]
    if not plan.train:
        raise PlanInvariantViolation(f"{plan.set_id} plan needs a 'train' list")
    trains = [registry[d] for d in plan.train]
    if plan.set_id == "SET1_SAME":
        return [(m.id, [m.id]) for m in trains]
    if plan.set_id == "SET2_CROSS":
        standard = [m.id for m in registry.standard()]
        out = []
        for m in trains:
            if m.in_the_wild:
                raise WildFlagViolation(f"{m.id} is an in-the-wild set; SET2 trains on standard ones")
            out.append((m.id, [d for d in standard if d != m.id]))
        return out
    # SET3_WILD
    tests = ([registry[d] for d in plan.test] if plan.test is not None else registry.wild())
    if not tests:
        raise PlanInvariantViolation("SET3_WILD: no in-the-wild datasets registered")
    for m in trains:
        check_wild_flags(m, tests)
    return [(m.id, [t.id for t in tests]) for m in trains]


def expand_jobs(plan: ExperimentPlan, registry: Registry) -> list[Job]:
    targets = resolve_targets(plan, registry)
    return [Job(plan.set_id, meth, train, test)
            for meth in plan.methods for train, tests in targets for test in tests]


# ---------------------------------------------------------------- execution


def _prepared(registry: Registry, ds_id: str, plan: ExperimentPlan) -> DatasetManifest:
    m = registry[ds_id]
    return apply_declared_subsample(m, plan.seed) if plan.use_subsample else m


def _run_unit(args) -> list[EvaluationReport]:
    plan, registry, method, train, tests = args
    cache = FeatureCache()
    if plan.amalgam:
        sources = [_prepared(registry, m.id, plan) for m in _sources(plan, registry)]
        per = plan.per_source or DEFAULT_PER_SOURCE[plan.set_id]
        res = run_amalgam(method, sources, per, plan.repeats, plan.grid, plan.seed,
                          plan.split_fraction, cache, plan.set_id, ds_id=train,
                          kind=plan.kernel)
        return list(res.repeats) + [res.mean]
    if plan.set_id == "SET1_SAME":
        return [run_same_dataset(method, _prepared(registry, train, plan), plan.split_fraction,
                                 plan.grid, plan.seed, cache, kind=plan.kernel)]
    return run_cross(method, _prepared(registry, train, plan),
                     [_prepared(registry, t, plan) for t in tests], plan.grid, plan.seed,
                     cache, plan.set_id, kind=plan.kernel)


def execute_plan(plan: ExperimentPlan, registry: Registry, jobs: int = 1
                 ) -> list[EvaluationReport]:
    """Run every job; output order follows the plan, not completion order."""
    units = [(plan, registry, meth, train, tests)
             for meth in plan.methods for train, tests in resolve_targets(plan, registry)]
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_unit, units))
    else:
        chunks = [_run_unit(u) for u in units]
    return [r for chunk in chunks for r in chunk]
