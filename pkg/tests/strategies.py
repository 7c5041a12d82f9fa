"""Small, well-formed workflow instances for property tests and sweeps."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from swirl.model import DistributedWorkflowInstance, make_instance


def random_instance(rng: random.Random, max_steps: int = 5, max_locs: int = 4) -> DistributedWorkflowInstance:
    """Steps s0..sk-1 in topological order; every input port is an earlier
    step's output, so every input is eventually produced."""
    k = rng.randint(1, max_steps)
    locs = [f"l{i}" for i in range(rng.randint(1, max_locs))]
    steps = [f"s{i}" for i in range(k)]
    ports: list[str] = []
    deps: list[tuple[str, str]] = []
    data_port: dict[str, str] = {}
    for i, s in enumerate(steps):
        for p in rng.sample(ports, min(len(ports), rng.randint(0, 2))):
            deps.append((p, s))
        for j in range(rng.randint(0, 2)):
            p = f"p{i}_{j}"
            ports.append(p)
            deps.append((s, p))
            data_port[f"d{i}_{j}"] = p
    mapping = {s: rng.sample(locs, min(len(locs), rng.randint(1, 2))) for s in steps}
    # produced data may be pre-placed only where none of its consumers run;
    # elsewhere the optimized system could fire a consumer before the producer
    consumers = {p: {s for a, s in deps if a == p} for p in ports}
    placement: dict[str, list[str]] = {}
    for d in rng.sample(sorted(data_port), min(len(data_port), rng.randint(0, 2))):
        busy = {l for s in consumers[data_port[d]] for l in mapping[s]}
        free = [l for l in locs if l not in busy]
        if free:
            placement.setdefault(rng.choice(free), []).append(d)
    return make_instance(steps, ports, deps, locs, mapping, data_port, placement)


def random_instances(count: int, seed: int = 0, max_steps: int = 5, max_locs: int = 4):
    rng = random.Random(seed)
    return [random_instance(rng, max_steps, max_locs) for _ in range(count)]


def small_instances(max_steps: int = 5, max_locs: int = 4):
    return st.builds(lambda r: random_instance(r, max_steps, max_locs), st.randoms(use_true_random=False))


_ids = st.sampled_from(["a", "b", "c", "d"])
_locs = st.sampled_from(["l1", "l2", "l3"])


def _idset(min_size: int = 0):
    return st.frozensets(_ids, min_size=min_size, max_size=2)


@st.composite
def _exec(draw):
    from swirl.ir import Dataflow, Exec

    ins = draw(_idset())
    outs = draw(_idset()) - ins
    return Exec(draw(st.sampled_from(["s1", "s2"])), Dataflow(ins, outs), draw(st.frozensets(_locs, min_size=1, max_size=2)))


def predicates():
    from swirl.ir import Recv, Send

    return st.one_of(
        _exec(),
        st.builds(Send, _ids, st.sampled_from(["p", "q"]), _locs, _locs),
        st.builds(Recv, st.sampled_from(["p", "q"]), _locs, _locs),
    )


def traces(max_leaves: int = 8):
    from swirl.ir import NIL, Act, Par, Seq

    leaves = st.one_of(st.just(NIL), predicates().map(Act))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(st.builds(Seq, kids, kids), st.builds(Par, kids, kids)),
        max_leaves=max_leaves,
    )


@st.composite
def systems(draw):
    from swirl.ir import LocationConfig, WorkflowSystem

    locs = draw(st.lists(_locs, unique=True, max_size=3))
    return WorkflowSystem(tuple(LocationConfig(l, draw(_idset()), draw(traces())) for l in locs))
