"""Regenerate the sample inputs in this directory."""

from pathlib import Path

from isonorm import io
from isonorm.constructions import (GroupAction, linking_groupoid, transformation_groupoid)
from isonorm.corpus import relation_counterexample
from isonorm.groups import cyclic_group
from isonorm.towers import f2_tower, z_tower

HERE = Path(__file__).parent


def write(name, data):
    io.write_json(HERE / name, data)


def main():
    z2 = cyclic_group(2)
    # Z/2 acting trivially on two points: 4 elements, 2 units, Z/2 isotropy everywhere
    act = GroupAction.from_function(z2, ["u0", "u1"], lambda g, x: x)
    G = transformation_groupoid(act, name="z2pair")
    write("g.json", io.groupoid_to_json(G))
    write("h.json", {"groupoid": "z2pair", "terms": [["u0", 1, 0], ["1.u0", 1, 0]]})
    write("f.json", {"groupoid": "z2pair",
                     "terms": [["u0", 1, 0], ["1.u0", 0.5, 0], ["u1", 0, 2], ["1.u1", -1, 0]]})
    write("bisections.json", {"x": "u0", "bisections": "canonical"})
    write("state.json", {"mu": {"u0": 0.5, "u1": 0.5},
                         "fields": {"u0": {"u0": [1, 0], "1.u0": [1, 0]},
                                    "u1": {"u1": [1, 0], "1.u1": [0, 0]}}})
    write("functional.json", {"values": {"u0": [0.25, 0], "1.u0": [0.25, 0], "u1": [0.75, 0]}})

    # partial action of Z/3 on three points: the generator moves p to q only
    write("partial.json", {"name": "partial", "group": {"backend": "cyclic", "order": 3},
                           "points": ["p", "q", "r"],
                           "partial": {"1": {"p": "q"}, "2": {"q": "p"}}})

    T = linking_groupoid(G, name="linking")
    write("linking.json", io.groupoid_to_json(T))

    R, x, fam = relation_counterexample()
    write("relation.json", io.groupoid_to_json(R))
    write("relation_bisections.json", {"x": x, "bisections": fam})
    write("relation_h.json", {"groupoid": "relation",
                              "terms": [["p:(1,0)", 1, 0], ["p:(0,1)", 2, 0]]})

    write("f2tower.json", io.tower_to_json(f2_tower((2, 3, 4))))
    write("gensum.json", {"terms": [["a", 1, 0], ["A", 1, 0], ["b", 1, 0], ["B", 1, 0]]})
    write("ztower.json", io.tower_to_json(z_tower(8)))
    write("zsum.json", {"terms": [["a", 1, 0], ["A", 1, 0]]})
    write("sl2tower.json", {"group": {"backend": "matrix",
                                      "generators": {"s": [[0, -1], [1, 0]],
                                                     "t": [[1, 1], [0, 1]]}},
                            "levels": {"congruence": [2, 4, 8, 16]}})
    write("sl2elem.json", {"terms": [["st", 0.7, 0], ["TS", 0.7, 0], ["t", 0.3, 0.4],
                                     ["T", 0.3, -0.4], ["sts", -1.1, 0], ["STS", -1.1, 0]]})
    write("trace.json", {"mu": {"1": 0.25, "2": 0.25, "inf": 0.5},
                         "tau": [[w or "", 1, 0] for w in ["", "a", "A", "b", "B"]],
                         "probes": [[["a", 1, 0], ["A", 1, 0], ["b", 1, 0], ["B", 1, 0]]]})


if __name__ == "__main__":
    main()
