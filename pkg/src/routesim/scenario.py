"""Scenario descriptions, their text format, and the built-in reference networks.

The file format is line oriented.  ``#`` starts a comment, ``[section]``
opens a section, and every other non-blank line belongs to the section above
it::

    [general]  name=<str> duration_s=<int> seed=<int> bucket_s=<int> protocol=rip|ospf|isis|eigrp
    [nodes]    <id> host|switch|router [gateway=<router>] [processing_us=<int>]
    [links]    <idA> <idB> <bandwidth_bps> <prop_delay_us>
    [failures] <time_s> <idA> <idB> fail|recover
    [flows]    <src> <dst> <start_s> <stop_s> <rate_pps> <rate_bps>

``[general]`` may also carry ``jitter=on`` to give each router a seeded
phase offset for its periodic timers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

PROTOCOLS = ("rip", "ospf", "isis", "eigrp")
NODE_KINDS = ("host", "switch", "router")
REQUIRED_SECTIONS = ("general", "nodes", "links")
SECTIONS = ("general", "nodes", "links", "failures", "flows")


class ParseError(ValueError):
    def __init__(self, line: int | None, cause: str):
        self.line = line
        self.cause = cause
        super().__init__(f"line {line}: {cause}" if line is not None else cause)


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: str
    gateway: str | None = None
    processing_us: int = 0


@dataclass(frozen=True)
class LinkSpec:
    a: str
    b: str
    bandwidth: int  # bits/s
    prop_delay: int  # microseconds

    @property
    def key(self) -> frozenset:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class FailureSpec:
    time: int  # seconds
    a: str
    b: str
    status: str  # "fail" or "recover"


@dataclass(frozen=True)
class FlowSpec:
    src: str
    dst: str
    start: int
    stop: int
    rate_pps: int
    rate_bps: int

    @property
    def packet_bits(self) -> int:
        return self.rate_bps // self.rate_pps


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: int
    seed: int = 1
    bucket: int = 1
    protocol: str = "ospf"
    nodes: tuple = ()
    links: tuple = ()
    failures: tuple = ()
    flows: tuple = ()
    jitter: bool = False

    def node(self, node_id) -> NodeSpec:
        return next(n for n in self.nodes if n.id == node_id)

    def with_protocol(self, protocol: str) -> Scenario:
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
        return replace(self, protocol=protocol)


def _int(tok: str, what: str, line: int, minimum: int | None = None) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(line, f"{what} must be an integer, got {tok!r}") from None
    if minimum is not None and v < minimum:
        raise ParseError(line, f"{what} must be at least {minimum}, got {v}")
    return v


@dataclass
class _Builder:
    general: dict = field(default_factory=dict)
    nodes: list = field(default_factory=list)
    links: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    seen: set = field(default_factory=set)
    node_line: dict = field(default_factory=dict)
    link_line: dict = field(default_factory=dict)


def parse_scenario(text: str) -> Scenario:
    b = _Builder()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ParseError(lineno, f"unknown section [{section}]")
            if section in b.seen:
                raise ParseError(lineno, f"section [{section}] repeated")
            b.seen.add(section)
            continue
        if section is None:
            raise ParseError(lineno, "content before the first section")
        _PARSERS[section](b, line.split(), lineno)
    for s in REQUIRED_SECTIONS:
        if s not in b.seen:
            raise ParseError(None, f"missing [{s}] section")
    return _finish(b)


def _parse_general(b: _Builder, toks, lineno):
    for tok in toks:
        key, sep, value = tok.partition("=")
        if not sep or not value:
            raise ParseError(lineno, f"expected key=value, got {tok!r}")
        if key not in ("name", "duration_s", "seed", "bucket_s", "protocol", "jitter"):
            raise ParseError(lineno, f"unknown setting {key!r}")
        if key in b.general:
            raise ParseError(lineno, f"setting {key!r} given twice")
        if key == "duration_s":
            value = _int(value, "duration_s", lineno, 0)
        elif key == "seed":
            value = _int(value, "seed", lineno)
            if not -(2**63) <= value < 2**64:
                raise ParseError(lineno, "seed must fit in 64 bits")
        elif key == "bucket_s":
            value = _int(value, "bucket_s", lineno, 1)
        elif key == "protocol":
            value = value.lower()
            if value not in PROTOCOLS:
                raise ParseError(lineno, f"unknown protocol {value!r}")
        elif key == "jitter":
            if value not in ("on", "off"):
                raise ParseError(lineno, "jitter must be on or off")
            value = value == "on"
        b.general[key] = (value, lineno)


def _parse_node(b: _Builder, toks, lineno):
    if len(toks) < 2:
        raise ParseError(lineno, "node line needs <id> <kind>")
    node_id, kind = toks[0], toks[1].lower()
    if kind not in NODE_KINDS:
        raise ParseError(lineno, f"unknown node kind {kind!r}")
    if node_id in b.node_line:
        raise ParseError(lineno, f"duplicate node id {node_id!r}")
    opts = {}
    for tok in toks[2:]:
        key, sep, value = tok.partition("=")
        if not sep or key not in ("gateway", "processing_us"):
            raise ParseError(lineno, f"unknown node option {tok!r}")
        opts[key] = value
    gateway = opts.get("gateway")
    if gateway is not None and kind != "host":
        raise ParseError(lineno, "only hosts take a gateway")
    proc = _int(opts.get("processing_us", "0"), "processing_us", lineno, 0)
    if proc and kind != "router":
        raise ParseError(lineno, "only routers take processing_us")
    b.node_line[node_id] = lineno
    b.nodes.append(NodeSpec(node_id, kind, gateway, proc))


def _known(b, node_id, lineno):
    if node_id not in b.node_line:
        raise ParseError(lineno, f"unknown node {node_id!r}")


def _parse_link(b: _Builder, toks, lineno):
    if len(toks) != 4:
        raise ParseError(lineno, "link line needs <idA> <idB> <bandwidth_bps> <prop_delay_us>")
    a, z = toks[0], toks[1]
    _known(b, a, lineno)
    _known(b, z, lineno)
    if a == z:
        raise ParseError(lineno, f"link from {a!r} to itself")
    link = LinkSpec(a, z, _int(toks[2], "bandwidth", lineno, 1), _int(toks[3], "propagation delay", lineno, 0))
    if link.key in b.link_line:
        raise ParseError(lineno, f"duplicate link {a}-{z} (first on line {b.link_line[link.key]})")
    b.link_line[link.key] = lineno
    b.links.append(link)


def _parse_failure(b: _Builder, toks, lineno):
    if len(toks) != 4:
        raise ParseError(lineno, "failure line needs <time_s> <idA> <idB> fail|recover")
    t = _int(toks[0], "failure time", lineno, 0)
    a, z, status = toks[1], toks[2], toks[3].lower()
    if status not in ("fail", "recover"):
        raise ParseError(lineno, f"status must be fail or recover, got {toks[3]!r}")
    _known(b, a, lineno)
    _known(b, z, lineno)
    if frozenset((a, z)) not in b.link_line:
        raise ParseError(lineno, f"no link {a}-{z}")
    b.failures.append((FailureSpec(t, a, z, status), lineno))


def _parse_flow(b: _Builder, toks, lineno):
    if len(toks) != 6:
        raise ParseError(lineno, "flow line needs <src> <dst> <start_s> <stop_s> <rate_pps> <rate_bps>")
    src, dst = toks[0], toks[1]
    _known(b, src, lineno)
    _known(b, dst, lineno)
    start = _int(toks[2], "flow start", lineno, 0)
    stop = _int(toks[3], "flow stop", lineno, 0)
    pps = _int(toks[4], "rate_pps", lineno, 1)
    bps = _int(toks[5], "rate_bps", lineno, 1)
    if stop < start:
        raise ParseError(lineno, "flow stops before it starts")
    if bps % pps:
        raise ParseError(lineno, "rate_bps must be a whole multiple of rate_pps")
    if src == dst:
        raise ParseError(lineno, "flow source and destination coincide")
    b.flows.append((FlowSpec(src, dst, start, stop, pps, bps), lineno))


_PARSERS = {
    "general": _parse_general,
    "nodes": _parse_node,
    "links": _parse_link,
    "failures": _parse_failure,
    "flows": _parse_flow,
}


def _finish(b: _Builder) -> Scenario:
    g = b.general
    for key in ("name", "duration_s"):
        if key not in g:
            raise ParseError(None, f"[general] lacks {key}")
    duration = g["duration_s"][0]
    kinds = {n.id: n.kind for n in b.nodes}
    for n in b.nodes:
        if n.gateway is not None and kinds.get(n.gateway) != "router":
            raise ParseError(b.node_line[n.id], f"gateway {n.gateway!r} is not a router")
    degree = {}
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for link in b.links:
        line = b.link_line[link.key]
        for end in (link.a, link.b):
            degree[end] = degree.get(end, 0) + 1
            if kinds[end] == "host" and degree[end] > 1:
                raise ParseError(line, f"host {end!r} has more than one link")
        if kinds[link.a] == kinds[link.b] == "switch":
            ra, rb = find(link.a), find(link.b)
            if ra == rb:
                raise ParseError(line, f"layer-2 loop closed by {link.a}-{link.b}")
            parent[ra] = rb
    for f, line in b.failures:
        if f.time >= duration:
            raise ParseError(line, f"failure at {f.time} s is not before the end ({duration} s)")
    for f, line in b.flows:
        for end in (f.src, f.dst):
            if kinds[end] != "host":
                raise ParseError(line, f"flow endpoint {end!r} is not a host")
    return Scenario(
        name=g["name"][0],
        duration=duration,
        seed=g.get("seed", (1,))[0],
        bucket=g.get("bucket_s", (1,))[0],
        protocol=g.get("protocol", ("ospf",))[0],
        nodes=tuple(b.nodes),
        links=tuple(b.links),
        failures=tuple(f for f, _ in b.failures),
        flows=tuple(f for f, _ in b.flows),
        jitter=g.get("jitter", (False,))[0],
    )


def serialize_scenario(s: Scenario) -> str:
    out = ["[general]", f"name={s.name}", f"duration_s={s.duration}", f"seed={s.seed}",
           f"bucket_s={s.bucket}", f"protocol={s.protocol}"]
    if s.jitter:
        out.append("jitter=on")
    out += ["", "[nodes]"]
    for n in s.nodes:
        parts = [n.id, n.kind]
        if n.gateway is not None:
            parts.append(f"gateway={n.gateway}")
        if n.processing_us:
            parts.append(f"processing_us={n.processing_us}")
        out.append(" ".join(parts))
    out += ["", "[links]"]
    out += [f"{l.a} {l.b} {l.bandwidth} {l.prop_delay}" for l in s.links]
    out += ["", "[failures]"]
    out += [f"{f.time} {f.a} {f.b} {f.status}" for f in s.failures]
    out += ["", "[flows]"]
    out += [f"{f.src} {f.dst} {f.start} {f.stop} {f.rate_pps} {f.rate_bps}" for f in s.flows]
    return "\n".join(out) + "\n"


# -- reference scenarios --------------------------------------------------

TEN_MBPS = 10**7
HUNDRED_MBPS = 10**8
PROP_US = 5

FAILURE_SCHEDULE = (
    (225, "fail"), (400, "recover"), (535, "fail"), (590, "recover"), (605, "fail"),
    (620, "recover"), (625, "fail"), (630, "recover"), (730, "fail"), (830, "recover"),
)

_BASE_NODES = (
    NodeSpec("PC1", "host", gateway="R6"),
    NodeSpec("PC2", "host", gateway="R6"),
    NodeSpec("Switch1", "switch"),
    NodeSpec("Switch2", "switch"),
) + tuple(NodeSpec(f"R{i}", "router") for i in range(1, 7))

_DIRECT = (("PC1", "Switch1"), ("Switch1", "R6"), ("R6", "Switch2"), ("Switch2", "PC2"))
_ALTERNATE = (("Switch1", "R1"), ("R1", "R2"), ("R2", "R3"), ("R3", "R4"), ("R4", "R5"), ("R5", "Switch2"))


def _figure2(name, fast):
    upgraded = set(_ALTERNATE) | {("Switch1", "R6")} if fast else set()
    links = tuple(
        LinkSpec(a, b, HUNDRED_MBPS if (a, b) in upgraded else TEN_MBPS, PROP_US) for a, b in _DIRECT + _ALTERNATE
    )
    failures = () if fast else tuple(FailureSpec(t, "R1", "R2", st) for t, st in FAILURE_SCHEDULE)
    return Scenario(
        name=name,
        duration=900,
        seed=1,
        bucket=1,
        protocol="ospf",
        nodes=_BASE_NODES,
        links=links,
        failures=failures,
        flows=(FlowSpec("PC1", "PC2", 30, 900, 100, 120_000),),
    )


def reference_scenarios() -> dict[str, Scenario]:
    """Built-in scenarios keyed by name.

    ``figure2`` has a one-router direct path PC1-Switch1-R6-Switch2-PC2 and a
    five-router detour through R1..R5 whose R1-R2 link fails and recovers on
    the reference schedule.  ``figure2_fastpath`` runs the detour and R6's
    Switch1 port at 100 Mbps with no failures.
    """
    return {"figure2": _figure2("figure2", False), "figure2_fastpath": _figure2("figure2_fastpath", True)}
