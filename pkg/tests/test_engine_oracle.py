"""Necessity analysis against an independent full-grid brute force."""

from __future__ import annotations

import random

import pytest

from dmnbot.engine import decision, is_necessary, representative_domain
from dmnbot.model import Assignment, Value, raw_inputs

from genmodels import random_in_domain_value, random_model
from oracle import oracle_evaluate, oracle_is_necessary, oracle_points

CASES = 220


def _random_partial(rng, model, root):
    askable = raw_inputs(model, root)
    bound = {}
    for clause in askable:
        if rng.random() < 0.45:
            bound[clause.slug] = random_in_domain_value(rng, clause)
    return askable, bound


def test_is_necessary_agrees_with_brute_force_everywhere():
    """>= 200 random models: 100% agreement on every queried input."""
    agreements = 0
    for seed in range(CASES):
        rng = random.Random(seed)
        model, root = random_model(rng)
        askable, bound = _random_partial(rng, model, root)
        for clause in askable:
            if clause.slug in bound:
                continue
            got = is_necessary(model, root, clause.slug, Assignment(bound))
            want = oracle_is_necessary(model, root, clause.slug, bound)
            assert got == want, (
                f"seed {seed}: disagreement on {clause.name} with {bound}"
            )
            agreements += 1
    assert agreements >= CASES  # at least one query per model on average


def test_monotonicity_of_unnecessity():
    """Once an input is unnecessary it stays unnecessary under any extension."""
    checked = 0
    for seed in range(120):
        rng = random.Random(10_000 + seed)
        model, root = random_model(rng)
        askable, bound = _random_partial(rng, model, root)
        unbound = [c for c in askable if c.slug not in bound]
        if len(unbound) < 2:
            continue
        target = unbound[0]
        if is_necessary(model, root, target.slug, Assignment(bound)):
            continue
        extension = dict(bound)
        for clause in unbound[1:]:
            if rng.random() < 0.7:
                extension[clause.slug] = random_in_domain_value(rng, clause)
        assert is_necessary(model, root, target.slug, Assignment(extension)) is False
        checked += 1
    assert checked >= 10


def test_partition_soundness_on_random_tables():
    """The decision at a representative equals the decision anywhere in the
    same partition cell."""
    for seed in range(100):
        rng = random.Random(20_000 + seed)
        model, root = random_model(rng, hierarchy_chance=0.0)
        askable = raw_inputs(model, root)
        free = {c.slug: random_in_domain_value(rng, c) for c in askable}
        snapped = {}
        for clause in askable:
            domain = representative_domain(model, root, clause)
            value = free[clause.slug]
            if clause.data_type.kind != "number":
                snapped[clause.slug] = value
                continue
            table = model.table(root)
            idx = [c.slug for c in table.inputs].index(clause.slug)
            tests = [r.input_entries[idx] for r in table.rules]
            signature = tuple(t.accepts(value) for t in tests)
            rep = next(
                v
                for v in domain.representatives
                if tuple(t.accepts(v) for t in tests) == signature
            )
            snapped[clause.slug] = rep
        assert decision(model, root, Assignment(free)) == decision(
            model, root, Assignment(snapped)
        )


def test_decision_agrees_with_oracle_on_complete_assignments():
    for seed in range(150):
        rng = random.Random(30_000 + seed)
        model, root = random_model(rng)
        askable = raw_inputs(model, root)
        binding = {c.slug: random_in_domain_value(rng, c) for c in askable}
        assert decision(model, root, Assignment(binding)) == oracle_evaluate(
            model, root, binding
        )


def test_oracle_points_cover_engine_representatives():
    """Sanity on the oracle itself: its grid refines the engine's."""
    for seed in range(40):
        rng = random.Random(40_000 + seed)
        model, root = random_model(rng, hierarchy_chance=0.0)
        for clause in raw_inputs(model, root):
            if clause.data_type.kind != "number":
                continue
            engine_reps = representative_domain(model, root, clause).representatives
            table = model.table(root)
            idx = [c.slug for c in table.inputs].index(clause.slug)
            tests = [r.input_entries[idx] for r in table.rules]
            engine_sigs = {tuple(t.accepts(v) for t in tests) for v in engine_reps}
            oracle_sigs = {
                tuple(t.accepts(v) for t in tests)
                for v in oracle_points(model, root, clause)
            }
            assert engine_sigs <= oracle_sigs
