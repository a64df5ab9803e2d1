"""On-disk curve documents and the built-in corpus.

A document is one JSON object::

    {
      "name": "banana",
      "components": [{"name": "v1", "genus": 0}, {"name": "v2", "genus": 0}],
      "nodes": [{"name": "n1", "ends": ["v1", "v2"]}, ...],
      "polarization": {"rank": 1, "multidegree": {"v1": 0, "v2": 0}},
      "line_bundle": {"v1": 1, "v2": 0},
      "marked_point": "v1",
      "desingularization": {"default": "cross", "matchings": {"n1>n2": "parallel"}},
      "options": {"search_cap": 200000, "connected_only": false, "choice_cap": 4096}
    }

Only ``components`` is required.  A missing polarization means the trivial
rank-1 one; a missing line bundle leaves the Abel commands unavailable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .abel import MATCHINGS, DesingularizationChoice
from .curve import NodalCurve, build_curve
from .errors import InputError
from .stability import Polarization, SheafClass, sheaf

DEFAULT_OPTIONS = {"search_cap": 200_000, "connected_only": False, "choice_cap": 4096}
KNOWN_KEYS = {"name", "components", "nodes", "polarization", "line_bundle", "marked_point",
              "desingularization", "options", "description"}


@dataclass(frozen=True)
class CurveDocument:
    name: str
    curve: NodalCurve
    polarization: Polarization
    line_bundle: SheafClass | None
    choice: DesingularizationChoice
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def marked(self) -> int:
        return self.curve.marked

    def echo(self) -> dict:
        """Normalised copy of the input, for certificates."""
        c = self.curve
        return {
            "name": self.name,
            "components": [{"name": x.name, "genus": x.genus} for x in c.components],
            "nodes": [{"name": n.name, "ends": [c.names[n.ends[0]], c.names[n.ends[1]]]}
                      for n in c.nodes],
            "polarization": {"rank": self.polarization.rank,
                             "multidegree": dict(zip(c.names, self.polarization.degrees))},
            "line_bundle": self.line_bundle.as_dict() if self.line_bundle else None,
            "marked_point": c.names[c.marked],
            "desingularization": self.choice.as_dict(c),
            "options": dict(sorted(self.options.items())),
        }


def _degree_map(curve: NodalCurve, value, what: str) -> tuple[int, ...]:
    if not isinstance(value, dict):
        raise InputError(f"{what} must map component names to degrees")
    for k, v in value.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputError(f"{what} entry for {k!r} is not an integer")
    return sheaf(curve, value).degrees


def parse_document(data: dict, name: str | None = None) -> CurveDocument:
    if not isinstance(data, dict):
        raise InputError("document must be a JSON object")
    unknown = set(data) - KNOWN_KEYS
    if unknown:
        raise InputError(f"unknown document keys: {sorted(unknown)}")
    if "components" not in data:
        raise InputError("document has no components")
    try:
        curve = build_curve({"components": data["components"], "nodes": data.get("nodes", []),
                             "marked": data.get("marked_point", 0)})
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed component or node entry: {exc}") from exc

    pol = data.get("polarization")
    if pol is None:
        E = Polarization.trivial(curve)
    else:
        if not isinstance(pol, dict) or "rank" not in pol:
            raise InputError("polarization needs a rank")
        degs = pol.get("multidegree")
        degs = (0,) * curve.p if degs is None else _degree_map(curve, degs, "polarization")
        E = Polarization(int(pol["rank"]), degs)

    L = data.get("line_bundle")
    L = None if L is None else sheaf(curve, _degree_map(curve, L, "line_bundle"))

    desing = data.get("desingularization") or {}
    matchings = {}
    for key, m in (desing.get("matchings") or {}).items():
        parts = key.split(">")
        if len(parts) != 2:
            raise InputError(f"matching key {key!r} should look like 'R>S'")
        if m not in MATCHINGS:
            raise InputError(f"matching for {key!r} must be one of {MATCHINGS}")
        matchings[tuple(parts)] = m
    default = desing.get("default", "cross")
    if default not in MATCHINGS:
        raise InputError(f"default matching must be one of {MATCHINGS}")
    choice = DesingularizationChoice.from_names(curve, matchings, default)

    options = dict(DEFAULT_OPTIONS)
    extra = data.get("options") or {}
    bad = set(extra) - set(DEFAULT_OPTIONS)
    if bad:
        raise InputError(f"unknown options: {sorted(bad)}")
    options.update(extra)
    return CurveDocument(str(data.get("name", name or "curve")), curve, E, L, choice,
                         options, data)


def load_document(path) -> CurveDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from exc
    return parse_document(data, name=path.stem)


CORPUS_NAMES = ("banana", "triangle", "loop", "theta", "chain4", "mixed")


def corpus() -> list[CurveDocument]:
    """The built-in test curves, in a fixed order."""
    root = resources.files("jacobel") / "corpus"
    return [parse_document(json.loads((root / f"{n}.json").read_text()), n)
            for n in CORPUS_NAMES]


def corpus_document(name: str) -> CurveDocument:
    for doc in corpus():
        if doc.name == name:
            return doc
    raise InputError(f"no corpus curve named {name!r}")
