"""YAML netlist format.

Schema (all sections except ``nodes``/``branches`` optional)::

    name: fig3b
    description: free text
    defaults:
      units: {energy: GHz, capacitance: fF, inductance: pH, flux: Phi0, charge: 2e}
    ground: g
    nodes: [g, n1, n2, I]
    branches:
      - {name: J1, kind: josephson, nodes: [g, n1], E_J: 446.8, C_J: 43.2}
      - {name: C1, kind: capacitor, nodes: [I, g], C: 60}
      - {name: L1, kind: inductor, nodes: [g, n1], L: 72, tag: Ll}
    mutuals:
      - {inductors: [Ll, Lc], M: 25}
    loops:
      - {name: main, branches: [J1, aL, aR, J2], flux: {const: 0.5, dPhiZ: 1.0}}
    islands:
      - {name: island, nodes: [I], charge: Qb}
    bias: {dPhiZ: 0.0, Qb: 0.0}

Units other than the defaults above are rejected; the section exists so the
document is self-describing.
"""

from __future__ import annotations

from typing import Any

import yaml

from .circuit import BRANCH_KINDS, Branch, CircuitSpec, IslandSpec, LinearExpr, LoopSpec, Mutual

DEFAULT_UNITS = {"energy": "GHz", "capacitance": "fF", "inductance": "pH", "flux": "Phi0", "charge": "2e"}
_KIND_ALIASES = {"voltage-bias-port": "voltage_bias_port", "flux-bias-port": "flux_bias_port"}


class NetlistError(ValueError):
    """Parse or schema error, with 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class _MDict(dict):
    mark = None


class _MList(list):
    mark = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _MDict()
    for k_node, v_node in node.value:
        key = loader.construct_object(k_node, deep=True)
        if key in out:
            m = k_node.start_mark
            raise NetlistError(f"duplicate key '{key}'", m.line + 1, m.column + 1)
        out[key] = loader.construct_object(v_node, deep=True)
    out.mark = node.start_mark
    return out


def _construct_seq(loader, node):
    out = _MList(loader.construct_object(c, deep=True) for c in node.value)
    out.mark = node.start_mark
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_seq)


def _err(msg: str, obj: Any) -> NetlistError:
    m = getattr(obj, "mark", None)
    if m is None:
        return NetlistError(msg)
    return NetlistError(msg, m.line + 1, m.column + 1)


def _num(d: dict, key: str, default=None, required=False) -> float | None:
    if key not in d:
        if required:
            raise _err(f"missing field '{key}'", d)
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(f"field '{key}' must be a number", d)
    return float(v)


def _branch(d: Any) -> Branch:
    if not isinstance(d, dict):
        raise _err("branch entries must be mappings", d)
    kind = _KIND_ALIASES.get(d.get("kind"), d.get("kind"))
    if kind not in BRANCH_KINDS:
        raise _err(f"unknown component kind '{d.get('kind')}'", d)
    nodes = d.get("nodes")
    if not isinstance(nodes, list) or len(nodes) != 2:
        raise _err("branch 'nodes' must be a list of two node names", d)
    name = d.get("name")
    if not isinstance(name, str):
        raise _err("branch requires a string 'name'", d)
    allowed = {"name", "kind", "nodes", "E_J", "C_J", "C", "L", "tag"}
    extra = set(d) - allowed
    if extra:
        raise _err(f"unknown branch field(s) {sorted(extra)}", d)
    if kind == "josephson":
        return Branch(name, kind, (str(nodes[0]), str(nodes[1])), E_J=_num(d, "E_J", required=True), C=_num(d, "C_J", 0.0))
    if kind == "capacitor":
        return Branch(name, kind, (str(nodes[0]), str(nodes[1])), C=_num(d, "C", required=True))
    if kind == "inductor":
        tag = d.get("tag")
        return Branch(name, kind, (str(nodes[0]), str(nodes[1])), L=_num(d, "L", required=True), tag=None if tag is None else str(tag))
    return Branch(name, kind, (str(nodes[0]), str(nodes[1])), C=_num(d, "C", 0.0))


def spec_from_dict(doc: Any) -> CircuitSpec:
    if not isinstance(doc, dict):
        raise _err("netlist document must be a mapping", doc)
    known = {"name", "description", "defaults", "ground", "nodes", "branches", "mutuals", "loops", "islands", "bias"}
    extra = set(doc) - known
    if extra:
        raise _err(f"unknown section(s) {sorted(extra)}", doc)
    units = (doc.get("defaults") or {}).get("units") or {}
    for k, v in units.items():
        if DEFAULT_UNITS.get(k) != v:
            raise _err(f"unsupported unit {k}={v}; expected {DEFAULT_UNITS.get(k)}", units)
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise _err("'nodes' must be a nonempty list", doc)
    nodes_t = tuple(str(n) for n in nodes)
    if len(set(nodes_t)) != len(nodes_t):
        dup = sorted({n for n in nodes_t if nodes_t.count(n) > 1})
        raise _err(f"duplicate node name(s) {dup}", nodes)
    ground = str(doc.get("ground", nodes_t[0]))
    raw_branches = doc.get("branches") or []
    branches = tuple(_branch(b) for b in raw_branches)
    bnames = [b.name for b in branches]
    if len(set(bnames)) != len(bnames):
        dup = sorted({n for n in bnames if bnames.count(n) > 1})
        raise _err(f"duplicate branch name(s) {dup}", raw_branches)
    tags = {b.tag for b in branches if b.tag}
    mutuals = []
    for m in doc.get("mutuals") or []:
        pair = m.get("inductors") if isinstance(m, dict) else None
        if not isinstance(pair, list) or len(pair) != 2:
            raise _err("mutual requires 'inductors: [tagA, tagB]'", m)
        for t in pair:
            if t not in tags:
                raise _err(f"mutual references nonexistent inductor tag '{t}'", m)
        mutuals.append(Mutual((str(pair[0]), str(pair[1])), _num(m, "M", required=True)))
    loops = []
    for lp in doc.get("loops") or []:
        if not isinstance(lp, dict) or "name" not in lp or not isinstance(lp.get("branches"), list):
            raise _err("loop requires 'name' and a 'branches' list", lp)
        flux = lp.get("flux", 0.0)
        if isinstance(flux, dict):
            for k, v in flux.items():
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise _err(f"flux coefficient '{k}' must be a number", flux)
        elif isinstance(flux, bool) or not isinstance(flux, (int, float)):
            raise _err("loop 'flux' must be a number or a mapping", lp)
        loops.append(LoopSpec(str(lp["name"]), tuple(str(b) for b in lp["branches"]), LinearExpr.from_mapping(flux)))
    islands = []
    for isl in doc.get("islands") or []:
        if not isinstance(isl, dict) or "name" not in isl or not isinstance(isl.get("nodes"), list):
            raise _err("island requires 'name' and a 'nodes' list", isl)
        islands.append(IslandSpec(str(isl["name"]), tuple(str(n) for n in isl["nodes"]), str(isl.get("charge", isl["name"]))))
    bias = doc.get("bias") or {}
    if not isinstance(bias, dict):
        raise _err("'bias' must be a mapping", bias)
    for k, v in bias.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise _err(f"bias '{k}' must be a number", bias)
    return CircuitSpec(
        name=str(doc.get("name", "circuit")),
        nodes=nodes_t,
        ground=ground,
        branches=branches,
        loops=tuple(loops),
        islands=tuple(islands),
        mutuals=tuple(mutuals),
        bias=tuple((str(k), float(v)) for k, v in bias.items()),
        description=str(doc.get("description", "")),
    )


def parse_netlist(text: str) -> CircuitSpec:
    """Parse a YAML netlist document into a CircuitSpec."""
    try:
        doc = yaml.load(text, Loader=_Loader)
    except NetlistError:
        raise
    except yaml.MarkedYAMLError as exc:
        m = exc.problem_mark or exc.context_mark
        raise NetlistError(f"syntax error: {exc.problem}", m.line + 1 if m else None, m.column + 1 if m else None) from exc
    return spec_from_dict(doc)


def spec_to_dict(spec: CircuitSpec) -> dict:
    branches = []
    for b in spec.branches:
        d: dict[str, Any] = {"name": b.name, "kind": b.kind, "nodes": list(b.nodes)}
        if b.kind == "josephson":
            d.update(E_J=b.E_J, C_J=b.C)
        elif b.kind == "inductor":
            d["L"] = b.L
            if b.tag:
                d["tag"] = b.tag
        else:
            d["C"] = b.C
        branches.append(d)
    out: dict[str, Any] = {"name": spec.name}
    if spec.description:
        out["description"] = spec.description
    out["defaults"] = {"units": dict(DEFAULT_UNITS)}
    out["ground"] = spec.ground
    out["nodes"] = list(spec.nodes)
    out["branches"] = branches
    if spec.mutuals:
        out["mutuals"] = [{"inductors": list(m.tags), "M": m.M} for m in spec.mutuals]
    if spec.loops:
        out["loops"] = [{"name": lp.name, "branches": list(lp.branches), "flux": lp.flux.to_mapping()} for lp in spec.loops]
    if spec.islands:
        out["islands"] = [{"name": i.name, "nodes": list(i.nodes), "charge": i.charge} for i in spec.islands]
    if spec.bias:
        out["bias"] = dict(spec.bias)
    return out


def serialize_netlist(spec: CircuitSpec) -> str:
    """Canonical YAML form; ``parse_netlist(serialize_netlist(s)) == s``."""
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False, default_flow_style=None, width=120)


def load_netlist(path) -> CircuitSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_netlist(fh.read())
