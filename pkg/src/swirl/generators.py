"""Fixture instances: the four-location example workflow and the
parameterized 1000 Genomes workflow."""

from __future__ import annotations

from dataclasses import dataclass

from .model import DistributedWorkflowInstance, make_instance


def fig1_instance() -> DistributedWorkflowInstance:
    """s1 on ld produces d1@p1 and d2@p2; s2 (on l1) consumes p1; s3 (on l2
    and l3) consumes p2."""
    return make_instance(
        steps=["s1", "s2", "s3"],
        ports=["p1", "p2"],
        deps=[("s1", "p1"), ("s1", "p2"), ("p1", "s2"), ("p2", "s3")],
        locations=["ld", "l1", "l2", "l3"],
        mapping={"s1": ["ld"], "s2": ["l1"], "s3": ["l2", "l3"]},
        data_port={"d1": "p1", "d2": "p2"},
    )


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class GenomeParams:
    n: int  # individuals steps
    m: int  # mutations_overlap steps (= frequency steps)
    a: int = 1  # individuals locations
    b: int = 1  # mutations_overlap locations
    c: int = 1  # frequency locations

    def __post_init__(self) -> None:
        for name in ("n", "m", "a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def parse(cls, text: str) -> "GenomeParams":
        try:
            parts = [int(x) for x in text.split(",")]
        except ValueError:
            raise InvalidParams(f"expected n,m,a,b,c integers, got {text!r}") from None
        if len(parts) != 5:
            raise InvalidParams(f"expected 5 comma-separated integers, got {text!r}")
        return cls(*parts)


def _rr(prefix: str, i: int, k: int) -> str:
    """Location of the i-th (1-based) step of a class spread over k locations."""
    return f"{prefix}_{(i - 1) % k + 1}"


def gen_1000genomes(p: GenomeParams) -> DistributedWorkflowInstance:
    """Simplified 1000 Genomes workflow with round-robin placement per class.

    Naming: step ``s_I_3`` is the third individuals step, ``l_MO_1`` the first
    mutations_overlap location; ``d0_*``/``p0_*`` are the initial inputs
    distributed by the auxiliary step ``s0`` from ``l_d``.
    """
    steps = ["s0", "s_IM", "s_SF"]
    ports = ["p0_SF", "p_IM", "p_SF"]
    data = {"d0_SF": "p0_SF", "d_IM": "p_IM", "d_SF": "p_SF"}
    deps = [("s0", "p0_SF"), ("p0_SF", "s_SF"), ("s_SF", "p_SF"), ("s_IM", "p_IM")]
    mapping: dict[str, list[str]] = {"s0": ["l_d"], "s_IM": ["l_IM"], "s_SF": ["l_SF"]}
    initial = ["d0_SF"]

    for i in range(1, p.n + 1):
        s = f"s_I_{i}"
        steps.append(s)
        ports += [f"p0_{i}", f"pI_{i}"]
        data[f"d0_{i}"] = f"p0_{i}"
        data[f"dI_{i}"] = f"pI_{i}"
        deps += [("s0", f"p0_{i}"), (f"p0_{i}", s), (s, f"pI_{i}"), (f"pI_{i}", "s_IM")]
        mapping[s] = [_rr("l_I", i, p.a)]
        initial.append(f"d0_{i}")

    for h in range(1, p.m + 1):
        ports.append(f"pP_{h}")
        data[f"dP_{h}"] = f"pP_{h}"
        deps.append(("s0", f"pP_{h}"))
        initial.append(f"dP_{h}")
        for cls, k in (("MO", p.b), ("F", p.c)):
            s = f"s_{cls}_{h}"
            steps.append(s)
            deps += [("p_IM", s), ("p_SF", s), (f"pP_{h}", s)]
            mapping[s] = [_rr(f"l_{cls}", h, k)]

    locations = (
        ["l_d", "l_IM", "l_SF"]
        + [f"l_I_{j}" for j in range(1, p.a + 1)]
        + [f"l_MO_{t}" for t in range(1, p.b + 1)]
        + [f"l_F_{k}" for k in range(1, p.c + 1)]
    )
    return make_instance(
        steps=steps,
        ports=ports,
        deps=deps,
        locations=locations,
        mapping=mapping,
        data_port=data,
        placement={"l_d": initial},
    )
