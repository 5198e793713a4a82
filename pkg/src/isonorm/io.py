"""JSON formats for groups, groupoids, elements, states and towers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import AlgebraElement
from .constructions import (GroupAction, PartialAction, partial_action_groupoid,
                            transformation_groupoid)
from .errors import InputError
from .groupoid import FiniteGroupoid, Grading, RawGroupoid, validate_groupoid
from .groups import (FiniteGroup, FreeGroup, MatrixGroup, cyclic_group, dihedral_group,
                     symmetric_group)
from .representations import SchreierLevel
from .states import StateData
from .towers import QuotientTower, TowerElement, congruence_level, cyclic_level


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _need(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"{where}: missing field {key!r}")
    return data[key]


def _complex(re, im=0.0) -> complex:
    try:
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise InputError(f"bad coefficient {re!r}, {im!r}") from None


# -- groups ----------------------------------------------------------------------

def group_from_json(data: dict):
    backend = data.get("backend", "table")
    try:
        if backend == "table":
            return FiniteGroup(_need(data, "elements", "group"), _need(data, "table", "group"),
                               data.get("name", ""), data.get("generators"))
        if backend == "permutation":
            return FiniteGroup.from_permutations(_need(data, "generators", "group"),
                                                 data.get("name", ""))
        if backend == "cyclic":
            return cyclic_group(int(_need(data, "order", "group")))
        if backend == "dihedral":
            return dihedral_group(int(_need(data, "order", "group")))
        if backend == "symmetric":
            return symmetric_group(int(_need(data, "degree", "group")))
        if backend == "free":
            return FreeGroup(_need(data, "generators", "group"))
        if backend == "matrix":
            return MatrixGroup(_need(data, "generators", "group"))
    except InputError:
        raise
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed group description: {exc}") from None
    raise InputError(f"unknown group backend {backend!r}")


def group_to_json(group) -> dict:
    if isinstance(group, FiniteGroup):
        out = {"backend": "table", "elements": list(group.elements),
               "table": group.table.tolist(), "name": group.name}
        if group.generators:
            out["generators"] = dict(group.generators)
        return out
    if isinstance(group, FreeGroup):
        return {"backend": "free", "generators": list(group.generator_names)}
    if isinstance(group, MatrixGroup):
        return {"backend": "matrix",
                "generators": {k: [[a, b], [c, d]] for k, (a, b, c, d) in group.gens.items()}}
    raise InputError(f"cannot serialize group {group!r}")


# -- groupoids -------------------------------------------------------------------

def raw_from_json(data: dict) -> RawGroupoid:
    for key in ("elements", "units", "range", "source", "compose"):
        _need(data, key, "groupoid")
    return RawGroupoid([str(e) for e in data["elements"]], [str(u) for u in data["units"]],
                       {str(k): str(v) for k, v in data["range"].items()},
                       {str(k): str(v) for k, v in data["source"].items()},
                       [[str(t) for t in trip] for trip in data["compose"]],
                       data.get("grading"), str(data.get("name", "")))


def grading_from_json(data: dict) -> Grading:
    group = group_from_json(_need(data, "group", "grading"))
    labels = _need(data, "label", "grading")
    if isinstance(group, FiniteGroup):
        labels = {k: str(v) for k, v in labels.items()}
    return Grading(group, labels)


def groupoid_from_json(data: dict) -> FiniteGroupoid:
    """A groupoid description, or an action / partial action file."""
    if "action" in data:
        return transformation_groupoid(action_from_json(data), name=str(data.get("name", "")))
    if "partial" in data:
        return partial_action_groupoid(partial_action_from_json(data),
                                       name=str(data.get("name", "")))
    raw = raw_from_json(data)
    G = FiniteGroupoid.from_raw(raw)
    if raw.grading is not None:
        G.with_grading(grading_from_json(raw.grading))
    return G


def groupoid_to_json(G: FiniteGroupoid) -> dict:
    raw = G.to_raw()
    out = {"elements": raw.elements, "units": raw.units, "range": raw.range,
           "source": raw.source, "compose": raw.compose}
    if G.name:
        out["name"] = G.name
    if raw.grading is not None:
        out["grading"] = raw.grading
    return out


def validate_file(path):
    data = read_json(path)
    if "action" in data or "partial" in data:
        G = groupoid_from_json(data)
        return validate_groupoid(G.to_raw())
    return validate_groupoid(raw_from_json(data))


def load_groupoid(path) -> FiniteGroupoid:
    return groupoid_from_json(read_json(path))


def action_from_json(data: dict) -> GroupAction:
    group = group_from_json(_need(data, "group", "action file"))
    triples = [(str(g), str(x), str(y)) for g, x, y in _need(data, "action", "action file")]
    return GroupAction.from_triples(group, [str(p) for p in _need(data, "points", "action file")],
                                    triples)


def partial_action_from_json(data: dict) -> PartialAction:
    """``{group, points, partial: {γ: {x: γx}}, max_length}`` (cap only for free groups)."""
    group = group_from_json(_need(data, "group", "partial action file"))
    maps = {str(g): {str(x): str(y) for x, y in m.items()}
            for g, m in _need(data, "partial", "partial action file").items()}
    if isinstance(group, FiniteGroup):
        for g in maps:
            if g not in group:
                raise InputError(f"partial action names unknown group element {g}")
        maps.setdefault(group.identity, {str(p): str(p) for p in data["points"]})
    cap = data.get("max_length")
    return PartialAction(group, [str(p) for p in _need(data, "points", "partial action file")],
                         maps, None if cap is None else int(cap))


# -- algebra elements and bisections -----------------------------------------------

def element_from_json(G: FiniteGroupoid, data: dict) -> AlgebraElement:
    host = data.get("groupoid")
    if host and G.name and str(host) != G.name:
        raise InputError(f"element belongs to groupoid {host!r}, not {G.name!r}")
    terms: dict = {}
    for t in _need(data, "terms", "element"):
        if len(t) not in (2, 3):
            raise InputError(f"element term {t} is not [id, re, im]")
        g = str(t[0])
        if g not in G.index:
            raise InputError(f"element term names unknown groupoid element {g}")
        terms[g] = terms.get(g, 0.0) + _complex(*t[1:])
    return AlgebraElement(G, terms)


def element_to_json(f: AlgebraElement) -> dict:
    return {"groupoid": f.G.name, "terms": [[g, c.real, c.imag] for g, c in f.terms.items()]}


def load_element(G, path) -> AlgebraElement:
    return element_from_json(G, read_json(path))


def bisections_from_json(data: dict) -> tuple[str | None, dict | None, object]:
    """``{x, bisections: {g: [ids]} | "canonical", neighbourhood}``."""
    fam = _need(data, "bisections", "bisection file")
    x = data.get("x")
    if fam == "canonical":
        fam = None
    elif not isinstance(fam, dict):
        raise InputError("bisections must be a map or the string 'canonical'")
    else:
        fam = {str(k): [str(u) for u in v] for k, v in fam.items()}
    return (None if x is None else str(x)), fam, data.get("neighbourhood")


# -- states ----------------------------------------------------------------------

def state_from_json(data: dict) -> StateData:
    mu = {str(k): float(v) for k, v in _need(data, "mu", "state").items()}
    fields = {}
    for x, vals in data.get("fields", {}).items():
        fields[str(x)] = {str(g): _complex(*v) if isinstance(v, (list, tuple)) else _complex(v)
                          for g, v in vals.items()}
    return StateData(mu, fields)


def state_to_json(data: StateData) -> dict:
    return {"mu": {k: float(v) for k, v in sorted(data.mu.items())},
            "fields": {x: {g: [complex(v).real, complex(v).imag] for g, v in sorted(f.items())}
                       for x, f in sorted(data.fields.items())}}


# -- towers ----------------------------------------------------------------------

def tower_from_json(data: dict) -> QuotientTower:
    """``{group: {backend, generators}, levels: [...] | {congruence: [...]} | {cyclic: [...]}}``."""
    gdata = _need(data, "group", "tower")
    group = group_from_json(gdata)
    levels_data = _need(data, "levels", "tower")
    if isinstance(levels_data, dict):
        if "congruence" in levels_data:
            mats = levels_data.get("matrices") or gdata.get("generators")
            if not isinstance(mats, dict):
                raise InputError("congruence levels need generator matrices")
            levels = [congruence_level(mats, int(m)) for m in levels_data["congruence"]]
        elif "cyclic" in levels_data:
            names = list(getattr(group, "generator_names", ()))
            if len(names) != 1:
                raise InputError("cyclic levels need a one-generator group")
            levels = [cyclic_level(int(m), names[0]) for m in levels_data["cyclic"]]
        else:
            raise InputError("level shorthand must be 'congruence' or 'cyclic'")
    else:
        levels = []
        for k, lev in enumerate(levels_data, 1):
            images = _need(lev, "images", f"level {k}")
            levels.append(SchreierLevel(int(_need(lev, "cosets", f"level {k}")),
                                        {str(g): list(p) for g, p in images.items()}))
    return QuotientTower(group, levels)


def tower_to_json(tower: QuotientTower) -> dict:
    return {"group": group_to_json(tower.group),
            "levels": [{"cosets": lev.cosets,
                        "images": {g: p.tolist() for g, p in sorted(lev.images.items())}}
                       for lev in tower.levels]}


def tower_element_from_json(data) -> TowerElement:
    terms = data["terms"] if isinstance(data, dict) else data
    out = []
    for t in terms:
        if len(t) not in (2, 3):
            raise InputError(f"tower term {t} is not [word, re, im]")
        out.append((str(t[0]), _complex(*t[1:])))
    return TowerElement(out)


def tower_trace_from_json(data: dict):
    """``{mu: {"1": [...], ..., "inf": m}, tau: [[word, re, im], ...], probes: [...]}``."""
    mu = _need(data, "mu", "tower trace")
    tau = {}
    for t in _need(data, "tau", "tower trace"):
        if len(t) not in (2, 3):
            raise InputError(f"trace entry {t} is not [word, re, im]")
        tau[str(t[0])] = _complex(*t[1:])
    probes = [tower_element_from_json(p) for p in data.get("probes", [])]
    return mu, tau, probes


def as_jsonable(x):
    """Numpy scalars and complex numbers to plain JSON values."""
    if isinstance(x, dict):
        return {str(k): as_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [as_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return as_jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
