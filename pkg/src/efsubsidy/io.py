"""JSON documents (instances, solutions, traces, generator configs) and
seeded random instance generators."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .envy import Solution
from .errors import ContractError, ParseError
from .model import (
    Additive,
    Allocation,
    BundlePacking,
    CappedGroups,
    Instance,
    Table,
    Threshold,
    Valuation,
    goods_of,
)

INSTANCE_FORMAT = "efsubsidy-instance"
SOLUTION_FORMAT = "efsubsidy-solution"
CONFIG_FORMAT = "efsubsidy-generator"
SCHEMA_VERSION = 1

KINDS = ("Additive", "CappedGroups", "Threshold", "BundlePacking", "Table")


# -- low-level field readers -------------------------------------------------

def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", where=f"line {exc.lineno} col {exc.colno}") from None


def _get(obj: dict, key: str, where: str, default=...):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    if key not in obj:
        if default is ...:
            raise ParseError(f"missing field {key!r}", where)
        return default
    return obj[key]


def _int(x, where: str, lo: int | None = None) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise ParseError(f"expected an integer, got {x!r}", where)
    if lo is not None and x < lo:
        raise ParseError(f"expected an integer >= {lo}, got {x}", where)
    return x


def _goods(x, m: int, where: str) -> list[int]:
    if not isinstance(x, list):
        raise ParseError("expected an array of good indices", where)
    out = []
    for k, g in enumerate(x):
        g = _int(g, f"{where}[{k}]", lo=0)
        if g >= m:
            raise ParseError(f"good {g} outside 0..{m - 1}", f"{where}[{k}]")
        out.append(g)
    if len(set(out)) != len(out):
        raise ParseError("duplicate good index", where)
    return out


def _check_header(doc, fmt: str, where: str = "") -> None:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", where or None)
    got = doc.get("format")
    if got != fmt:
        raise ParseError(f"expected format {fmt!r}, got {got!r}", "format")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})", "version")


# -- instances ----------------------------------------------------------------

def _parse_valuation(spec, m: int, where: str, strict: bool = True) -> Valuation:
    from .oracle import check_dichotomous

    kind = _get(spec, "kind", where)
    try:
        if kind == "Additive":
            return Additive(m, _goods(_get(spec, "goods", where), m, f"{where}.goods"))
        if kind == "CappedGroups":
            groups = _get(spec, "groups", where)
            if not isinstance(groups, list):
                raise ParseError("expected an array", f"{where}.groups")
            parsed = []
            for k, grp in enumerate(groups):
                w = f"{where}.groups[{k}]"
                parsed.append((_goods(_get(grp, "goods", w), m, f"{w}.goods"), _int(_get(grp, "cap", w), f"{w}.cap", lo=0)))
            return CappedGroups(m, parsed)
        if kind in ("Threshold", "BundlePacking"):
            key = "required" if kind == "Threshold" else "demands"
            sets = _get(spec, key, where)
            if not isinstance(sets, list):
                raise ParseError("expected an array of arrays", f"{where}.{key}")
            sets = [_goods(s, m, f"{where}.{key}[{k}]") for k, s in enumerate(sets)]
            return Threshold(m, sets) if kind == "Threshold" else BundlePacking(m, sets)
        if kind == "Table":
            values = _get(spec, "values", where)
            if not isinstance(values, list) or len(values) != 1 << m:
                got = len(values) if isinstance(values, list) else type(values).__name__
                raise ParseError(f"table needs 2**{m} = {1 << m} values, got {got}", f"{where}.values")
            values = [_int(x, f"{where}.values[{k}]", lo=0) for k, x in enumerate(values)]
            table = Table(m, values)
            if _get(spec, "unchecked", where, False) is True or not strict:
                return table
            report = check_dichotomous(table)
            if not report.ok:
                raise ParseError(f"table is not dichotomous ({report.describe()}); set \"unchecked\": true to load anyway", f"{where}.values")
            table.certified = True
            return table
    except ContractError as exc:
        raise ParseError(str(exc), where) from None
    raise ParseError(f"unknown valuation kind {kind!r}; expected one of {', '.join(KINDS)}", f"{where}.kind")


def instance_from_dict(doc: dict, strict: bool = True) -> Instance:
    """Build an instance. Tables are checked for dichotomy unless flagged
    ``"unchecked"``; ``strict=False`` loads every table unchecked."""
    _check_header(doc, INSTANCE_FORMAT)
    n = _int(_get(doc, "n", ""), "n", lo=1)
    m = _int(_get(doc, "m", ""), "m", lo=0)
    agents = _get(doc, "agents", "")
    if not isinstance(agents, list) or len(agents) != n:
        raise ParseError(f"expected {n} agent valuations", "agents")
    vals = [_parse_valuation(a, m, f"agents[{i}]", strict) for i, a in enumerate(agents)]
    meta = doc.get("metadata") or {}
    return Instance(vals, m, name=meta.get("name"))


def parse_instance(text: str, strict: bool = True) -> Instance:
    return instance_from_dict(_loads(text), strict)


def valuation_to_dict(v: Valuation) -> dict:
    out = {"kind": v.kind, **v.params()}
    if isinstance(v, Table) and not v.trusted:
        out["unchecked"] = True
    return out


def instance_to_dict(inst: Instance, metadata: dict | None = None) -> dict:
    meta = dict(metadata or {})
    if inst.name and "name" not in meta:
        meta["name"] = inst.name
    doc = {
        "format": INSTANCE_FORMAT,
        "version": SCHEMA_VERSION,
        "n": inst.n,
        "m": inst.m,
        "agents": [valuation_to_dict(v) for v in inst.valuations],
    }
    if meta:
        doc["metadata"] = meta
    return doc


def serialize_instance(inst: Instance, metadata: dict | None = None) -> str:
    return json.dumps(instance_to_dict(inst, metadata), indent=1)


def load_instance(path, strict: bool = True) -> Instance:
    text = Path(path).read_text()
    inst = parse_instance(text, strict)
    if inst.name is None:
        inst.name = Path(path).stem
    return inst


# -- solutions and traces ---------------------------------------------------------

def solution_to_dict(sol: Solution) -> dict:
    return {
        "format": SOLUTION_FORMAT,
        "version": SCHEMA_VERSION,
        "n": sol.allocation.n,
        "m": sol.allocation.m,
        "bundles": sol.allocation.sets(),
        "subsidies": list(sol.subsidies),
        "total_subsidy": sol.total,
    }


def solution_from_dict(doc: dict, inst: Instance | None = None) -> Solution:
    _check_header(doc, SOLUTION_FORMAT)
    n = _int(_get(doc, "n", ""), "n", lo=1)
    m = _int(_get(doc, "m", ""), "m", lo=0)
    if inst is not None and (n, m) != (inst.n, inst.m):
        raise ParseError(f"solution is for n={n}, m={m} but instance has n={inst.n}, m={inst.m}")
    bundles = _get(doc, "bundles", "")
    if not isinstance(bundles, list) or len(bundles) != n:
        raise ParseError(f"expected {n} bundles", "bundles")
    sets = [_goods(b, m, f"bundles[{i}]") for i, b in enumerate(bundles)]
    subsidies = _get(doc, "subsidies", "")
    if not isinstance(subsidies, list) or len(subsidies) != n:
        raise ParseError(f"expected {n} subsidies", "subsidies")
    p = [_int(x, f"subsidies[{i}]", lo=0) for i, x in enumerate(subsidies)]
    try:
        return Solution(Allocation.from_sets(sets, m), tuple(p))
    except ContractError as exc:
        raise ParseError(str(exc), "bundles") from None


def serialize_solution(sol: Solution) -> str:
    return json.dumps(solution_to_dict(sol), indent=1)


def parse_solution(text: str, inst: Instance | None = None) -> Solution:
    return solution_from_dict(_loads(text), inst)


def trace_to_list(trace) -> list[dict]:
    return [
        {
            "t": r.t,
            "good": r.good,
            "branch": r.branch,
            "sigma": list(r.sigma) if r.sigma is not None else None,
            "receiver": r.receiver,
            "sink_candidates": list(r.sink_candidates),
            "allocation_after": r.allocation_after.sets(),
            "subsidies_after": list(r.subsidies_after),
            "oracle_calls_cum": r.oracle_calls_cum,
        }
        for r in trace
    ]


def serialize_trace(trace) -> str:
    return json.dumps(trace_to_list(trace))


def trace_solutions(text: str, inst: Instance) -> list[Solution]:
    """(allocation_after, subsidies_after) of each record in a trace document."""
    records = _loads(text)
    if not isinstance(records, list):
        raise ParseError("trace document must be a JSON array")
    out = []
    for k, r in enumerate(records):
        where = f"[{k}]"
        sets = [_goods(b, inst.m, f"{where}.allocation_after[{i}]") for i, b in enumerate(_get(r, "allocation_after", where))]
        p = [_int(x, f"{where}.subsidies_after", lo=0) for x in _get(r, "subsidies_after", where)]
        out.append(Solution(Allocation.from_sets(sets, inst.m), tuple(p)))
    return out


# -- generators -------------------------------------------------------------------

DICHOTOMOUS_FAMILIES = KINDS

DEFAULT_PARAMS = {
    "additive_density": [0.2, 0.8],
    "max_groups": 4,
    "max_cap": 3,
    "max_set_size": 3,
    "max_demands": 6,
    "table_max_m": 10,
}


@dataclass
class GeneratorConfig:
    """``n`` and ``m`` are an integer or an inclusive ``[lo, hi]`` range drawn
    per instance. ``families`` weights valuation kinds per agent."""

    seed: int
    n: int | list = 3
    m: int | list = 6
    families: dict = field(default_factory=lambda: {k: 1.0 for k in KINDS})
    params: dict = field(default_factory=dict)
    count: int = 1
    name: str = "gen"

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ContractError("generator seed must be an integer")
        for kind, w in self.families.items():
            if kind not in KINDS:
                raise ContractError(f"unknown family {kind!r}")
            if w < 0:
                raise ContractError(f"family weight for {kind} is negative")
        if not any(w > 0 for w in self.families.values()):
            raise ContractError("family weights are all zero")
        for key in ("n", "m"):
            lo, hi = _range(getattr(self, key))
            if lo > hi or lo < (1 if key == "n" else 0):
                raise ContractError(f"bad {key} range {getattr(self, key)!r}")
        if self.count < 1:
            raise ContractError("count must be positive")

    def param(self, key):
        return self.params.get(key, DEFAULT_PARAMS[key])


def _range(x) -> tuple[int, int]:
    if isinstance(x, int):
        return x, x
    lo, hi = x
    return int(lo), int(hi)


def config_from_dict(doc: dict) -> GeneratorConfig:
    _check_header(doc, CONFIG_FORMAT)
    try:
        return GeneratorConfig(
            seed=_get(doc, "seed", ""),
            n=doc.get("n", 3),
            m=doc.get("m", 6),
            families=doc.get("families") or {k: 1.0 for k in KINDS},
            params=doc.get("params") or {},
            count=doc.get("count", 1),
            name=doc.get("name", "gen"),
        )
    except (ContractError, TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None


def parse_config(text: str) -> GeneratorConfig:
    return config_from_dict(_loads(text))


def _random_subset(rng: random.Random, pool: list[int], size: int) -> list[int]:
    return rng.sample(pool, min(size, len(pool)))


def _sample_valuation(kind: str, m: int, rng: random.Random, cfg: GeneratorConfig) -> Valuation:
    goods = list(range(m))
    if kind == "Additive":
        lo, hi = cfg.param("additive_density")
        density = rng.uniform(lo, hi)
        return Additive(m, [g for g in goods if rng.random() < density])
    if kind == "CappedGroups":
        rng.shuffle(goods)
        k = rng.randint(1, cfg.param("max_groups"))
        cuts = sorted(rng.randint(0, m) for _ in range(k))
        groups, start = [], 0
        for c in cuts:
            groups.append((goods[start:c], rng.randint(1, cfg.param("max_cap"))))
            start = c
        return CappedGroups(m, [g for g in groups if g[0]])
    if kind == "Threshold":
        rng.shuffle(goods)
        required, start = [], 0
        while start < m and rng.random() < 0.8:
            size = rng.randint(1, cfg.param("max_set_size"))
            required.append(goods[start : start + size])
            start += size
        return Threshold(m, required)
    if kind == "BundlePacking":
        if m == 0:
            return BundlePacking(m, [])
        demands = [
            _random_subset(rng, goods, rng.randint(1, cfg.param("max_set_size")))
            for _ in range(rng.randint(1, cfg.param("max_demands")))
        ]
        return BundlePacking(m, demands)
    if kind == "Table":
        base = _sample_valuation(rng.choice(["CappedGroups", "BundlePacking", "Threshold"]), m, rng, cfg)
        table = Table.tabulate(base)
        table.certified = True  # tabulated from a dichotomous-by-construction family
        return table
    raise ContractError(f"unknown family {kind!r}")


def generate_one(cfg: GeneratorConfig, index: int = 0) -> Instance:
    rng = random.Random(cfg.seed * 1_000_003 + index)
    n = rng.randint(*_range(cfg.n))
    m = rng.randint(*_range(cfg.m))
    kinds = [k for k in KINDS if cfg.families.get(k, 0) > 0]
    if m > cfg.param("table_max_m") and len(kinds) > 1 and "Table" in kinds:
        kinds.remove("Table")
    weights = [cfg.families[k] for k in kinds]
    vals = [_sample_valuation(rng.choices(kinds, weights)[0], m, rng, cfg) for _ in range(n)]
    name = cfg.name if cfg.count == 1 else f"{cfg.name}-{index:04d}"
    return Instance(vals, m, name=name)


def generate(cfg: GeneratorConfig) -> Instance:
    """First instance of the config's stream; deterministic per seed."""
    return generate_one(cfg, 0)


def generate_corpus(cfg: GeneratorConfig) -> list[Instance]:
    return [generate_one(cfg, i) for i in range(cfg.count)]


def load_corpus(directory) -> list[Instance]:
    """Instances from every ``*.json`` in ``directory`` (sorted by name);
    generator configs expand to their ``count`` instances."""
    out = []
    for path in sorted(Path(directory).glob("*.json")):
        doc = _loads(path.read_text())
        fmt = doc.get("format") if isinstance(doc, dict) else None
        try:
            if fmt == CONFIG_FORMAT:
                out.extend(generate_corpus(config_from_dict(doc)))
            else:
                inst = instance_from_dict(doc)
                if inst.name is None:
                    inst.name = path.stem
                out.append(inst)
        except ParseError as exc:
            raise ParseError(str(exc), where=path.name) from None
    return out


def describe_bundles(A: Allocation) -> str:
    return " ".join("{" + ",".join(str(g) for g in goods_of(b)) + "}" for b in A.bundles)
