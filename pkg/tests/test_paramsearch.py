"""Grid/random search and the sequential trial driver."""

from __future__ import annotations

import json
import math
import random

import pytest

from bcogen.corpus import ChunkStrategy
from bcogen.errors import EmptyDimension, InvalidParameterSet
from bcogen.generation import RunRecord
from bcogen.paramsearch import (
    ParameterSet,
    RepoSpec,
    SearchSpace,
    grid,
    random_search,
    run_trials,
)


def serialize(sets: list[ParameterSet]) -> bytes:
    return json.dumps([s.to_dict() for s in sets], sort_keys=True).encode()


class StubPipeline:
    """Records generate() calls; optionally fails for poisoned llm ids."""

    def __init__(self, poison_llm: str | None = None):
        self.calls: list[tuple[str, ParameterSet]] = []
        self.poison_llm = poison_llm

    def generate(self, domain: str, params: ParameterSet) -> RunRecord:
        self.calls.append((domain, params))
        if self.poison_llm is not None and params.llm_model == self.poison_llm:
            raise RuntimeError("provider blew up")
        return RunRecord(
            run_id=f"run-{len(self.calls)}",
            domain=domain,
            paper_id="p",
            parameter_set=params,
            generated_json=["ok"],
            raw_response="[]",
            source_nodes=[],
            attempts=1,
            created_at="2024-01-01T00:00:00+00:00",
            validation=[],
        )


def test_parameter_set_defaults_are_valid():
    params = ParameterSet()
    assert params.k_first == 20 and params.k_final == 5
    assert params.chunk_strategy == ChunkStrategy("fixed_window", 1000, 100)


def test_parameter_set_rejects_bad_k():
    with pytest.raises(InvalidParameterSet):
        ParameterSet(k_first=3, k_final=5)
    with pytest.raises(InvalidParameterSet):
        ParameterSet(k_final=0)


def test_parameter_set_round_trips_through_dict():
    params = ParameterSet(
        chunk_strategy=ChunkStrategy("paragraph", 800, 0),
        repo=RepoSpec("https://example.org/r", "dev"),
        k_first=10,
        k_final=2,
    )
    assert ParameterSet.from_dict(params.to_dict()) == params


def test_grid_is_cartesian_product_in_name_then_candidate_order():
    space = SearchSpace({
        "k_final": [1, 2, 3],
        "chunk_strategy": [ChunkStrategy("fixed_window", 500, 50),
                           ChunkStrategy("paragraph", 500, 0)],
    })
    sets = grid(space)
    assert len(sets) == 6
    # "chunk_strategy" < "k_final" lexicographically, so it varies slowest
    assert [s.chunk_strategy.name for s in sets] == ["fixed_window"] * 3 + ["paragraph"] * 3
    assert [s.k_final for s in sets] == [1, 2, 3, 1, 2, 3]


def test_grid_singleton():
    sets = grid(SearchSpace({"llm_model": ["only-model"]}))
    assert len(sets) == 1
    assert sets[0].llm_model == "only-model"


def test_grid_empty_dimension():
    with pytest.raises(EmptyDimension):
        grid(SearchSpace({"llm_model": []}))


def test_grid_unknown_dimension_name():
    with pytest.raises(ValueError):
        grid(SearchSpace({"not_a_field": [1]}))


def test_grid_size_is_product_of_dimension_sizes():
    rng = random.Random(2)
    for _ in range(20):
        dims = {}
        for name, values in [
            ("k_final", [1, 2, 3, 4, 5]),
            ("llm_model", ["a", "b", "c"]),
            ("embedding_model", ["x", "y"]),
        ]:
            if rng.random() < 0.8:
                dims[name] = values[: rng.randint(1, len(values))]
        if not dims:
            continue
        expected = math.prod(len(v) for v in dims.values())
        assert len(grid(SearchSpace(dims))) == expected


def test_random_search_is_seed_reproducible():
    space = SearchSpace({"k_final": [1, 2, 3], "llm_model": ["a", "b"]})
    a = random_search(space, 25, seed=7)
    b = random_search(space, 25, seed=7)
    assert serialize(a) == serialize(b)
    c = random_search(space, 25, seed=8)
    assert serialize(a) != serialize(c)


def test_random_search_covers_all_combinations_with_high_n():
    # 6 combinations; P(missing one in 1000 draws) < 6*(5/6)^1000 < 1e-50.
    space = SearchSpace({"k_final": [1, 2], "llm_model": ["a", "b", "c"]})
    sets = random_search(space, 1000, seed=3)
    combos = {(s.k_final, s.llm_model) for s in sets}
    assert combos == {(k, m) for k in (1, 2) for m in ("a", "b", "c")}


def test_random_search_rejects_nonpositive_n():
    space = SearchSpace({"k_final": [1]})
    with pytest.raises(ValueError):
        random_search(space, 0, seed=1)


def test_search_space_from_json_file(tmp_path):
    path = tmp_path / "space.json"
    path.write_text(json.dumps({
        "k_final": [1, 5],
        "chunk_strategy": [{"name": "fixed_window", "window": 500, "overlap": 50}],
    }))
    space = SearchSpace.from_json_file(path)
    sets = grid(space)
    assert len(sets) == 2
    assert sets[0].chunk_strategy == ChunkStrategy("fixed_window", 500, 50)


def test_run_trials_counts_and_order():
    space = SearchSpace({"k_final": [1, 2, 3], "llm_model": ["a", "b"]})
    sets = grid(space)
    pipeline = StubPipeline()
    records = run_trials(sets, ["usability", "io"], pipeline)
    assert len(records) == 12
    # strictly sequential: trial i finishes both domains before trial i+1
    expected_calls = [(d, s) for s in sets for d in ("usability", "io")]
    assert pipeline.calls == expected_calls
    assert [r.run_id for r in records] == [f"run-{i}" for i in range(1, 13)]


def test_poisoned_trial_does_not_abort_sweep():
    space = SearchSpace({"llm_model": ["a", "poison", "c"]})
    sets = grid(space)
    pipeline = StubPipeline(poison_llm="poison")
    records = run_trials(sets, ["usability"], pipeline)
    assert len(records) == 3
    failed = [r for r in records if r.validation]
    assert len(failed) == 1
    assert failed[0].parameter_set.llm_model == "poison"
    assert "provider blew up" in failed[0].validation[0].message
    succeeded = [r for r in records if not r.validation]
    assert {r.parameter_set.llm_model for r in succeeded} == {"a", "c"}


def test_trial_isolation_under_deletion():
    space = SearchSpace({"llm_model": ["a", "b", "c", "d"]})
    sets = grid(space)
    full = run_trials(sets, ["usability"], StubPipeline())
    partial = run_trials([sets[0], sets[2], sets[3]], ["usability"], StubPipeline())
    full_by_llm = {r.parameter_set.llm_model: r.generated_json for r in full}
    partial_by_llm = {r.parameter_set.llm_model: r.generated_json for r in partial}
    for llm in ("a", "c", "d"):
        assert full_by_llm[llm] == partial_by_llm[llm]


def test_empty_set_list_yields_empty_records():
    assert run_trials([], ["usability"], StubPipeline()) == []
