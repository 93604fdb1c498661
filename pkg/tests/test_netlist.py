import pytest
from hypothesis import given, settings, strategies as st

from jpsq.builtins import builtin, fig3b, fig6
from jpsq.circuit import Branch, CircuitSpec, validate
from jpsq.netlist import NetlistError, parse_netlist, serialize_netlist

from conftest import data_text

MINIMAL = """
name: single
ground: g
nodes: [g, a]
branches:
  - {name: J, kind: josephson, nodes: [g, a], E_J: 10.0, C_J: 2.0}
"""


class TestParse:
    def test_minimal_document(self):
        spec = parse_netlist(MINIMAL)
        assert spec.active_nodes == ("a",)
        assert len(spec.branches) == 1
        assert spec.branches[0].E_J == 10.0 and spec.branches[0].C == 2.0

    def test_shipped_fig6_matches_caption(self):
        spec = parse_netlist(data_text("fig6_jpsq.yaml"))
        assert spec == builtin("fig6", "A")
        assert validate(spec).ok
        by = {b.name: b for b in spec.branches}
        assert by["Ll1"].L == by["Ll2"].L
        assert by["LaL1"].L == pytest.approx(25.0)  # L_Δ/2 per arm, L_Δ = 50 pH
        assert by["C01"].C == pytest.approx(0.1)

    @pytest.mark.parametrize(
        "fname, name", [("fig1.yaml", "fig1"), ("fig2.yaml", "fig2"), ("fig3b.yaml", "fig3b"), ("fig8.yaml", "fig8")]
    )
    def test_shipped_files_equal_builtins(self, fname, name):
        spec = parse_netlist(data_text(fname))
        assert spec == builtin(name)
        assert validate(spec).ok

    def test_missing_mutual_tag(self):
        doc = MINIMAL + "  - {name: L, kind: inductor, nodes: [g, a], L: 50.0, tag: t1}\n"
        doc += "mutuals:\n  - {inductors: [t1, ghost], M: 1.0}\n"
        with pytest.raises(NetlistError, match="ghost"):
            parse_netlist(doc)

    def test_syntax_error_has_location(self):
        with pytest.raises(NetlistError) as ei:
            parse_netlist("name: x\nnodes: [g, a\nbranches: []\n")
        assert ei.value.line is not None and ei.value.column is not None

    def test_unknown_kind(self):
        with pytest.raises(NetlistError, match="unknown component kind"):
            parse_netlist(MINIMAL.replace("josephson", "memristor"))

    def test_duplicates(self):
        with pytest.raises(NetlistError, match="duplicate node"):
            parse_netlist(MINIMAL.replace("[g, a]\nbranches", "[g, a, a]\nbranches"))
        doc = MINIMAL + "  - {name: J, kind: capacitor, nodes: [g, a], C: 1.0}\n"
        with pytest.raises(NetlistError, match="duplicate branch") as ei:
            parse_netlist(doc)
        assert ei.value.line is not None

    def test_port_kinds_accept_hyphenated_names(self):
        doc = MINIMAL + "  - {name: P, kind: voltage-bias-port, nodes: [g, a]}\n"
        assert parse_netlist(doc).branches[1].kind == "voltage_bias_port"


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["fig1", "fig2", "fig3b", "fig6", "fig8"])
    def test_builtins(self, name):
        spec = builtin(name)
        text = serialize_netlist(spec)
        assert parse_netlist(text) == spec
        assert serialize_netlist(parse_netlist(text)) == text

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(1.0, 500.0, allow_nan=False),
        st.floats(0.1, 10.0),
        st.floats(0.0, 100.0),
        st.floats(1.5, 60.0),
        st.floats(0.05, 0.45),
    )
    def test_random_parameters(self, e_ja, c_ja, c_i, beta, phi_delta):
        for spec in (fig3b(e_ja, c_ja, c_i, beta, phi_delta), fig6(e_ja, c_ja, c_i, beta, phi_delta)):
            assert parse_netlist(serialize_netlist(spec)) == spec

    def test_mutual_roundtrip_with_negative_M(self):
        spec = builtin("fig8")
        assert any(m.M < 0 for m in spec.mutuals)
        assert parse_netlist(serialize_netlist(spec)).mutuals == spec.mutuals
