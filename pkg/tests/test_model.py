from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

from strategies import small_instances
from swirl.generators import GenomeParams, fig1_instance, gen_1000genomes
from swirl.model import (
    NotFound,
    ParseError,
    ValidationError,
    dumps_instance,
    instance_to_dict,
    load_instance,
    loads_instance,
    make_instance,
)


@pytest.fixture
def fig1():
    return fig1_instance()


class TestGraphQueries:
    def test_ports_of_steps(self, fig1):
        w = fig1.workflow
        assert w.in_ports("s2") == {"p1"}
        assert w.out_ports("s1") == {"p1", "p2"}
        assert w.in_ports("s1") == frozenset()

    def test_steps_of_ports(self, fig1):
        w = fig1.workflow
        assert w.in_steps("p2") == {"s1"}
        assert w.out_steps("p2") == {"s3"}

    def test_step_without_links(self):
        inst = make_instance(["s"], [], [], ["l"], {"s": ["l"]}, {})
        assert inst.workflow.in_ports("s") == frozenset()
        assert inst.workflow.out_ports("s") == frozenset()

    def test_data_of_steps(self, fig1):
        assert fig1.in_data("s3") == {"d2"}
        assert fig1.out_data("s1") == {"d1", "d2"}
        assert fig1.out_data("s2") == frozenset()

    def test_work_queue(self, fig1):
        assert fig1.work_queue("l2") == {"s3"}
        assert fig1.work_queue("ld") == {"s1"}
        idle = make_instance(["s"], [], [], ["l", "idle"], {"s": ["l"]}, {})
        assert idle.work_queue("idle") == frozenset()

    @pytest.mark.parametrize(
        "call",
        [
            lambda i: i.workflow.in_ports("nope"),
            lambda i: i.workflow.out_steps("nope"),
            lambda i: i.in_data("nope"),
            lambda i: i.work_queue("nope"),
        ],
    )
    def test_unknown_ids(self, fig1, call):
        with pytest.raises(NotFound):
            call(fig1)


class TestValidation:
    base = dict(
        steps=["a", "b"],
        ports=["p"],
        deps=[("a", "p"), ("p", "b")],
        locations=["l"],
        mapping={"a": ["l"], "b": ["l"]},
        data_port={"d": "p"},
    )

    def make(self, **over):
        return make_instance(**{**self.base, **over})

    def test_base_is_valid(self):
        assert self.make().topological_steps() == ["a", "b"]

    @pytest.mark.parametrize(
        "over, needle",
        [
            ({"mapping": {"a": ["l"], "b": ["elsewhere"]}}, "unknown location"),
            ({"mapping": {"a": ["l"]}}, "b"),
            ({"mapping": {"a": ["l"], "b": []}}, "b"),
            ({"deps": [("a", "b")]}, "bipartite"),
            ({"deps": [("a", "q")]}, "q"),
            ({"data_port": {"d": "q"}}, "q"),
            ({"data_port": {"d": "p", "e": "p"}}, "p"),
            ({"placement": {"l": ["zzz"]}}, "zzz"),
            ({"placement": {"nowhere": ["d"]}}, "nowhere"),
            ({"steps": ["a", "b", "p"]}, "p"),
        ],
    )
    def test_rejects(self, over, needle):
        with pytest.raises(ValidationError, match=needle):
            self.make(**over)

    def test_cycle(self):
        with pytest.raises(ValidationError, match="cycle"):
            self.make(ports=["p", "q"], deps=[("a", "p"), ("p", "b"), ("b", "q"), ("q", "a")])


class TestFileFormat:
    def test_shipped_fixture_is_fig1(self, fixtures_dir, fig1):
        assert load_instance(fixtures_dir / "fig1.instance") == fig1

    def test_canonical_text_is_fixed_point(self, fixtures_dir):
        for path in fixtures_dir.glob("*.instance"):
            text = path.read_text()
            assert dumps_instance(loads_instance(text)) == text

    def test_unknown_key(self, fig1):
        doc = instance_to_dict(fig1) | {"extra": 1}
        with pytest.raises(ParseError, match="extra"):
            loads_instance(json.dumps(doc))

    def test_json_error_has_line(self):
        with pytest.raises(ParseError) as err:
            loads_instance('{\n  "steps": [\n  oops\n]}')
        assert err.value.line == 3

    def test_bad_field_named(self, fig1):
        doc = instance_to_dict(fig1)
        doc["deps"][0] = {"from": "s1"}
        with pytest.raises(ParseError) as err:
            loads_instance(json.dumps(doc))
        assert err.value.field == "deps[0]"

    def test_mapping_to_undeclared_location(self, fig1):
        doc = instance_to_dict(fig1)
        doc["mapping"]["s2"] = ["mars"]
        with pytest.raises(ValidationError):
            loads_instance(json.dumps(doc))

    def test_cycle_in_file(self):
        doc = {
            "steps": [{"id": "a"}, {"id": "b"}],
            "ports": ["p", "q"],
            "deps": [{"from": "a", "to": "p"}, {"from": "p", "to": "b"}, {"from": "b", "to": "q"}, {"from": "q", "to": "a"}],
            "locations": ["l"],
            "mapping": {"a": ["l"], "b": ["l"]},
            "data": {},
        }
        with pytest.raises(ValidationError, match="cycle"):
            loads_instance(json.dumps(doc))

    def test_commands_survive(self):
        inst = make_instance(["s"], [], [], ["l"], {"s": ["l"]}, {}, step_meta={"s": "echo hi"})
        assert loads_instance(dumps_instance(inst)).step_meta == {"s": "echo hi"}

    @settings(max_examples=50, deadline=None)
    @given(small_instances())
    def test_round_trip(self, inst):
        assert loads_instance(dumps_instance(inst)) == inst


@given(small_instances())
@settings(max_examples=50, deadline=None)
def test_in_out_data_disjoint(inst):
    for s in inst.workflow.steps:
        assert not inst.in_data(s) & inst.out_data(s)


def test_genome_instance_shape():
    inst = gen_1000genomes(GenomeParams(2, 3, 1, 2, 1))
    assert inst.work_queue("l_MO_1") == {"s_MO_1", "s_MO_3"}
    assert inst.work_queue("l_MO_2") == {"s_MO_2"}
    assert inst.in_data("s_IM") == {"dI_1", "dI_2"}
    assert inst.in_data("s_F_2") == {"dP_2", "d_IM", "d_SF"}
    assert inst.placement["l_d"] == inst.out_data("s0")


@pytest.mark.parametrize("text", ["1,2", "0,1,1,1,1", "a,b,c,d,e"])
def test_genome_params_rejected(text):
    from swirl.generators import InvalidParams

    with pytest.raises(InvalidParams):
        GenomeParams.parse(text)
