#!/usr/bin/env python3
"""Writes data/ieee123: the 123-node test feeder with PV, wind and batteries added.

Line segments, configurations and spot loads follow the published feeder data. Closed switches
and voltage regulators become 10 ft config-1 segments (regulator taps at neutral); shunt capacitors,
the 61-610 transformer and open switches are left out. Delta loads are placed on their first phase.
DG placement and ratings are synthetic; totals match 525 kW PV, 1575 kW wind, 840 kWh storage.
"""
import json
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
import make_cigre as cigre  # noqa: E402

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "ieee123")

# (from, to, length ft, config)
LINES = """
1 2 175 10; 1 3 250 11; 1 7 300 1; 3 4 200 11; 3 5 325 11; 5 6 250 11; 7 8 200 1; 8 12 225 10; 8 9 225 9;
8 13 300 1; 9 14 425 9; 13 34 150 11; 13 18 825 2; 14 11 250 9; 14 10 250 9; 15 16 375 11; 15 17 350 11;
18 19 250 9; 18 21 300 2; 19 20 325 9; 21 22 525 10; 21 23 250 2; 23 24 550 11; 23 25 275 2; 25 26 350 7;
25 28 200 2; 26 27 275 7; 26 31 225 11; 27 33 500 9; 28 29 300 2; 29 30 350 2; 30 250 200 2; 31 32 300 11;
34 15 100 11; 35 36 650 8; 35 40 250 1; 36 37 300 9; 36 38 250 10; 38 39 325 10; 40 41 325 11; 40 42 250 1;
42 43 500 10; 42 44 200 1; 44 45 200 9; 44 47 250 1; 45 46 300 9; 47 48 150 4; 47 49 250 4; 49 50 250 4;
50 51 250 4; 52 53 200 1; 53 54 125 1; 54 55 275 1; 54 57 350 3; 55 56 275 1; 57 58 250 10; 57 60 750 3;
58 59 250 10; 60 61 550 5; 60 62 250 12; 62 63 175 12; 63 64 350 12; 64 65 425 12; 65 66 325 12; 67 68 200 9;
67 72 275 3; 67 97 250 3; 68 69 275 9; 69 70 325 9; 70 71 275 9; 72 73 275 11; 72 76 200 3; 73 74 350 11;
74 75 400 11; 76 77 400 6; 76 86 700 3; 77 78 100 6; 78 79 225 6; 78 80 475 6; 80 81 475 6; 81 82 250 6;
81 84 675 11; 82 83 250 6; 84 85 475 11; 86 87 450 6; 87 88 175 9; 87 89 275 6; 89 90 225 10; 89 91 225 6;
91 92 300 11; 91 93 225 6; 93 94 275 9; 93 95 300 6; 95 96 200 10; 97 98 275 3; 98 99 550 3; 99 100 300 3;
100 450 800 3; 101 102 225 11; 101 105 275 3; 102 103 325 11; 103 104 700 11; 105 106 225 10; 105 108 325 3;
106 107 575 10; 108 109 450 9; 108 300 1000 3; 109 110 300 9; 110 111 575 9; 110 112 125 9; 112 113 525 9;
113 114 325 9; 135 35 375 4; 149 1 400 1; 152 52 400 1; 160 67 350 6; 197 101 250 3;
150 149 10 1; 13 152 10 1; 18 135 10 1; 60 160 10 1; 97 197 10 1
"""

# Self and mutual impedances in ohm/mile, keyed by phase pair.
_S = {"a": (0.4576, 1.0780), "b": (0.4666, 1.0482), "c": (0.4615, 1.0651)}
_M = {"ab": (0.1560, 0.5017), "ac": (0.1535, 0.3849), "bc": (0.1580, 0.4236)}


def _overhead(order):
    """Config with physical conductor positions `order` assigned to phases A, B, C."""
    pos = {p: i for i, p in enumerate(order)}
    z = [[[0.0, 0.0] for _ in range(3)] for _ in range(3)]
    for r, pr in enumerate("ABC"):
        for c, pc in enumerate("ABC"):
            if pr not in pos or pc not in pos:
                continue
            a, b = "abc"[pos[pr]], "abc"[pos[pc]]
            z[r][c] = list(_S[a]) if a == b else list(_M["".join(sorted(a + b))])
    return z


def _single(phase):
    z = [[[0.0, 0.0] for _ in range(3)] for _ in range(3)]
    i = "ABC".index(phase)
    z[i][i] = [1.3292, 1.3475]
    return z


CONFIGS = {
    "1": ("ABC", _overhead("ABC")), "2": ("ABC", _overhead("CAB")), "3": ("ABC", _overhead("BCA")),
    "4": ("ABC", _overhead("CBA")), "5": ("ABC", _overhead("BAC")), "6": ("ABC", _overhead("ACB")),
    "7": ("AC", _overhead("AC")), "8": ("AB", _overhead("AB")),
    "9": ("A", _single("A")), "10": ("B", _single("B")), "11": ("C", _single("C")),
    "12": ("ABC", [[[1.5209, 0.7521], [0.5198, 0.2775], [0.4924, 0.2157]],
                   [[0.5198, 0.2775], [1.5329, 0.7162], [0.5198, 0.2775]],
                   [[0.4924, 0.2157], [0.5198, 0.2775], [1.5209, 0.7521]]]),
}

# node: (model, [(phase, kW, kvar), ...])
LOADS = """
1 PQ A 40 20; 2 PQ B 20 10; 4 PQ C 40 20; 5 I C 20 10; 6 Z C 40 20; 7 PQ A 20 10; 9 PQ A 40 20; 10 I A 20 10;
11 Z A 40 20; 12 PQ B 20 10; 16 PQ C 40 20; 17 PQ C 20 10; 19 PQ A 40 20; 20 I A 40 20; 22 Z B 40 20;
24 PQ C 40 20; 28 I A 40 20; 29 Z A 40 20; 30 PQ C 40 20; 31 PQ C 20 10; 32 PQ C 20 10; 33 I A 40 20;
34 Z C 40 20; 35 PQ A 40 20; 37 Z A 40 20; 38 I B 20 10; 39 PQ B 20 10; 41 PQ C 20 10; 42 PQ A 20 10;
43 Z B 40 20; 45 I A 20 10; 46 PQ A 20 10; 47 I A 35 25 B 35 25 C 35 25; 48 Z A 70 50 B 70 50 C 70 50;
49 PQ A 35 25 B 70 50 C 35 20; 50 PQ C 40 20; 51 PQ A 20 10; 52 PQ A 40 20; 53 PQ A 40 20; 55 Z A 20 10;
56 PQ B 20 10; 58 I B 20 10; 59 PQ B 20 10; 60 PQ A 20 10; 62 Z C 40 20; 63 PQ A 40 20; 64 I B 75 35;
65 Z A 35 25 B 35 25 C 70 50; 66 PQ C 75 35; 68 PQ A 20 10; 69 PQ A 40 20; 70 PQ A 20 10; 71 PQ A 40 20;
73 PQ C 40 20; 74 Z C 40 20; 75 PQ C 40 20; 76 I A 105 80 B 70 50 C 70 50; 77 PQ B 40 20; 79 Z A 40 20;
80 PQ B 40 20; 82 PQ A 40 20; 83 PQ C 20 10; 84 PQ C 20 10; 85 PQ C 40 20; 86 PQ B 20 10; 87 PQ B 40 20;
88 PQ A 40 20; 90 I B 40 20; 92 PQ C 40 20; 94 PQ A 40 20; 95 PQ B 20 10; 96 PQ B 20 10; 98 PQ A 40 20;
99 PQ B 40 20; 100 Z C 40 20; 102 PQ C 20 10; 103 PQ C 40 20; 104 PQ C 40 20; 106 PQ B 40 20;
107 PQ B 40 20; 109 PQ A 40 20; 111 PQ A 20 10; 112 I A 20 10; 113 Z A 40 20; 114 PQ A 20 10
"""
ALPHA = {"PQ": 0, "I": 1, "Z": 2}

PV_NODES = ["18", "35", "47", "60", "76", "97", "105"]          # 7 x 75 W/(W/m2)
WIND_NODES = ["13", "54", "72"]                                  # 3 x 525 kW
BATTERY_NODES = ["8", "21", "25", "42", "44", "50", "57", "64", "81", "87", "93", "108"]  # 12 x 70 kWh


def parse_lines():
    out = []
    for rec in LINES.replace("\n", " ").split(";"):
        f = rec.split()
        if f:
            out.append((f[0], f[1], float(f[2]), f[3]))
    return out


def parse_loads():
    out = []
    for rec in LOADS.replace("\n", " ").split(";"):
        f = rec.split()
        if not f:
            continue
        node, model, rest = f[0], f[1], f[2:]
        for i in range(0, len(rest), 3):
            out.append((node, model, rest[i], float(rest[i + 1]), float(rest[i + 2])))
    return out


def main():
    lines = parse_lines()
    nodes = sorted({n for a, b, _, _ in lines for n in (a, b)}, key=int)
    energized = {"150": set("ABC")}
    changed = True
    while changed:
        changed = False
        for a, b, _, cfg in lines:
            ph = set(CONFIGS[cfg][0])
            for x, y in ((a, b), (b, a)):
                if x in energized and not ph <= energized.get(y, set()):
                    energized[y] = energized.get(y, set()) | ph
                    changed = True

    branches = [{"from": a, "to": b, "phases": CONFIGS[cfg][0], "config": cfg,
                 "length": {"value": length, "unit": "ft"}} for a, b, length, cfg in lines]
    network = {
        "name": "ieee123",
        "base_power": {"value": 1, "unit": "MVA"},
        "base_voltage": {"value": 2.40178, "unit": "kV"},
        "v_nom": {"value": 1.0, "unit": "pu"},
        "slack": "150",
        "nodes": nodes,
        "line_configs": {k: {"unit": "ohm/mile", "z": z} for k, (_, z) in CONFIGS.items()},
        "branches": branches,
        "provenance": {
            "segments, configurations": "reference feeder data",
            "switches and regulators": "10 ft config-1 segments, regulators at neutral tap",
            "omitted": "shunt capacitors, 61-610 transformer, open switches",
        },
    }

    loads = []
    for node, model, phase, kw, kvar in parse_loads():
        if phase not in energized[node]:
            raise SystemExit(f"load at {node} on unenergized phase {phase}")
        shares = [1.0 if p == phase else 0.0 for p in "ABC"]
        loads.append({"name": f"load{node}{phase.lower()}", "node": node, "alpha": ALPHA[model], "shares": shares,
                      "p_peak": {"value": kw, "unit": "kW"}, "q_peak": {"value": kvar, "unit": "kvar"}})
    for n in PV_NODES + WIND_NODES + BATTERY_NODES:
        if energized[n] != set("ABC"):
            raise SystemExit(f"DG node {n} is not three-phase")
    pv = [{"name": f"pv{n}", "node": n, "rho": {"value": 75, "unit": "W/(W/m2)"},
           "s_max": {"value": 82.5, "unit": "kVA"}} for n in PV_NODES]
    wind = [{"name": f"wt{n}", "node": n, "p_nom": {"value": 525, "unit": "kW"},
             "w_nom": {"value": cigre.W_NOM, "unit": "m/s"}, "w_max": {"value": cigre.W_MAX, "unit": "m/s"},
             "s_max": {"value": 578, "unit": "kVA"}} for n in WIND_NODES]
    loss = {"a": {"value": 1e-6, "unit": "1/W"}, "b": {"value": 0.02, "unit": "-"}, "c": {"value": 10, "unit": "W"}}
    batteries = [{"name": f"bat{n}", "node": n,
                  "e_min": {"value": 35, "unit": "kWh"}, "e_max": {"value": 70, "unit": "kWh"},
                  "e_init": {"value": 35, "unit": "kWh"},
                  "p_char_max": {"value": 20, "unit": "kW"}, "p_disch_max": {"value": 20, "unit": "kW"},
                  "s_max": {"value": 24, "unit": "kVA"}, "loss_char": loss, "loss_disch": loss}
                 for n in BATTERY_NODES]
    devices = {"loads": loads, "pv": pv, "wind": wind, "batteries": batteries,
               "provenance": {"loads": "reference spot loads",
                              "DG placement and ratings": "synthetic, totals matched to the published curves",
                              "battery loss coefficients": "synthetic"}}

    total_kw = sum(kw for _, _, _, kw, _ in parse_loads())
    ts = cigre.timeseries()
    ts["irradiance"]["values"] = [p / (2 * cigre.PV_RHO) for p in cigre.PV_AVAILABLE_W]
    ts["provenance"]["demand_scale"] = f"normalized demand profile; spot loads total {total_kw:g} kW"

    os.makedirs(OUT, exist_ok=True)
    for name, doc in (("network.json", network), ("devices.json", devices), ("timeseries.json", ts),
                      ("scenario.json", {"case": 1, "delta": {"value": 0.1, "unit": "pu"}, "reserve": False,
                                         "reserve_tau": {"value": 1, "unit": "h"}})):
        with open(os.path.join(OUT, name), "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    print(f"{len(nodes)} nodes, {len(branches)} branches, {len(loads)} load phases, {total_kw:g} kW")


if __name__ == "__main__":
    main()
