#!/usr/bin/env python3
"""Writes data/cigre: the 19-node low-voltage residential feeder with PV, wind and batteries.

Reference values: topology and segment lengths of the low-voltage residential benchmark,
the load table (peaks and exponents), the demand, price, PV and wind availability curves.
Synthetic values: cable phase matrices, phase shares, power factor, DG placement,
converter ratings and battery loss coefficients. The "provenance" block in each file says which.
"""
import json
import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "cigre")

DEMAND_KW = [56.070, 56.070, 46.725, 46.725, 56.070, 65.415, 84.105, 102.795, 121.485, 130.830, 140.175, 149.520,
             140.175, 140.175, 140.175, 140.175, 130.830, 130.830, 158.865, 186.900, 158.865, 121.485, 102.795, 65.415]
PRICE = [0.10165, 0.10165, 0.10165, 0.10115, 0.10165, 0.10165, 0.10165, 0.10165, 0.11322, 0.11322, 0.11322, 0.13236,
         0.13236, 0.11322, 0.11322, 0.11322, 0.11322, 0.11322, 0.13236, 0.13236, 0.11322, 0.11322, 0.11322, 0.10165]
PV_AVAILABLE_W = [0, 0, 0, 0, 0, 0, 30000, 60000, 90000, 120000, 142500, 150000,
                  135000, 127500, 120000, 90000, 60000, 30000, 0, 0, 0, 0, 0, 0]
WIND_AVAILABLE_W = [130000] * 6 + [94770, 94770, 28080, 66560, 16250, 94770] + [130000] * 12

PEAK_KW = 186.9
PV_RHO = 75.0        # W per W/m2, two units
W_NOM, W_MAX = 12.0, 25.0
WIND_P_NOM = 130000.0

# Above-rated hours get speeds between w_nom and w_max; below-rated speeds invert the cubic curve.
ABOVE_RATED = [13.1, 13.4, 12.9, 12.6, 13.8, 14.2, 0, 0, 0, 0, 0, 0,
               12.4, 12.8, 13.5, 14.0, 14.6, 15.1, 14.3, 13.2, 12.7, 13.0, 13.6, 13.9]


def wind_speed(t):
    p = WIND_AVAILABLE_W[t]
    if p >= WIND_P_NOM:
        return ABOVE_RATED[t]
    return round(W_NOM * (p / WIND_P_NOM) ** (1.0 / 3.0), 6)


def coupled(self_z, mutual_z):
    return [[list(self_z) if r == c else list(mutual_z) for c in range(3)] for r in range(3)]


def network():
    nodes = [str(k) for k in range(1, 20)]
    branches = [{"from": "1", "to": "2", "phases": "ABC", "impedance": {
        "unit": "ohm", "z": [[[0.004, 0.016] if r == c else [0.0, 0.0] for c in range(3)] for r in range(3)]}}]
    for k in range(2, 11):
        branches.append({"from": str(k), "to": str(k + 1), "phases": "ABC", "config": "UG1",
                         "length": {"value": 35, "unit": "m"}})
    laterals = [("4", "12", 30), ("5", "13", 35), ("13", "14", 35), ("14", "15", 35), ("15", "16", 30),
                ("7", "17", 30), ("10", "18", 30), ("11", "19", 30)]
    for a, b, length in laterals:
        branches.append({"from": a, "to": b, "phases": "ABC", "config": "UG3",
                         "length": {"value": length, "unit": "m"}})
    return {
        "name": "cigre-lv-residential",
        "base_power": {"value": 100, "unit": "kVA"},
        "base_voltage": {"value": 230.94, "unit": "V"},
        "v_nom": {"value": 1.0, "unit": "pu"},
        "slack": "1",
        "nodes": nodes,
        "line_configs": {
            "UG1": {"unit": "ohm/km", "z": coupled((0.287, 0.167), (0.121, 0.084))},
            "UG3": {"unit": "ohm/km", "z": coupled((1.022, 0.135), (0.200, 0.050))},
        },
        "branches": branches,
        "provenance": {
            "topology and lengths": "reference feeder",
            "transformer impedance": "reference feeder (4 % on 400 kVA)",
            "cable phase matrices": "synthetic, matched to the reference positive-sequence impedances",
        },
    }


def devices():
    table = [("11", 13400, 2, [0.5, 0.3, 0.2]), ("13", 47000, 0, [0.3, 0.4, 0.3]),
             ("14", 40000, 2, [0.25, 0.35, 0.4]), ("18", 70900, 0, [0.4, 0.3, 0.3]),
             ("19", 15600, 1, [0.2, 0.3, 0.5])]
    loads = [{"name": f"load{node}", "node": node, "alpha": alpha, "shares": shares,
              "p_peak": {"value": peak, "unit": "W"}, "power_factor": 0.95} for node, peak, alpha, shares in table]
    pv = [{"name": f"pv{node}", "node": node, "rho": {"value": PV_RHO, "unit": "W/(W/m2)"},
           "s_max": {"value": 82.5, "unit": "kVA"}} for node in ("5", "9")]
    wind = [{"name": "wt3", "node": "3", "p_nom": {"value": WIND_P_NOM, "unit": "W"},
             "w_nom": {"value": W_NOM, "unit": "m/s"}, "w_max": {"value": W_MAX, "unit": "m/s"},
             "s_max": {"value": 143, "unit": "kVA"}}]
    loss = {"a": {"value": 2e-6, "unit": "1/W"}, "b": {"value": 0.02, "unit": "-"}, "c": {"value": 5, "unit": "W"}}
    batteries = [{"name": f"bat{node}", "node": node,
                  "e_min": {"value": 19000, "unit": "Wh"}, "e_max": {"value": 38000, "unit": "Wh"},
                  "e_init": {"value": 19000, "unit": "Wh"},
                  "p_char_max": {"value": 10, "unit": "kW"}, "p_disch_max": {"value": 10, "unit": "kW"},
                  "s_max": {"value": 12, "unit": "kVA"}, "loss_char": loss, "loss_disch": loss}
                 for node in ("11", "13", "14", "18", "19")]
    return {
        "loads": loads, "pv": pv, "wind": wind, "batteries": batteries,
        "provenance": {
            "load nodes, peaks, exponents": "reference load table",
            "phase shares, power factor": "synthetic",
            "PV and wind placement, converter ratings": "synthetic",
            "PV productivity": "reconstructed from the published 150 kW availability peak",
            "battery energy window": "reconstructed from the published SOC curves (19 to 38 kWh)",
            "battery loss coefficients": "synthetic",
        },
    }


def timeseries():
    return {
        "horizon": 24,
        "dt": {"value": 1, "unit": "h"},
        "price": {"unit": "$/kWh", "values": PRICE},
        "irradiance": {"unit": "W/m2", "values": [p / (2 * PV_RHO) for p in PV_AVAILABLE_W]},
        "wind_speed": {"unit": "m/s", "values": [wind_speed(t) for t in range(24)]},
        "demand_scale": {"unit": "-", "values": [round(d / PEAK_KW, 12) for d in DEMAND_KW]},
        "provenance": {
            "price": "reference hourly prices",
            "irradiance": "reconstructed from the published PV availability curve",
            "wind_speed": "inverted from the published wind availability curve; above-rated hours synthetic",
            "demand_scale": "published demand curve divided by the 186.9 kW peak",
        },
    }


def main():
    os.makedirs(OUT, exist_ok=True)
    files = {"network.json": network(), "devices.json": devices(), "timeseries.json": timeseries(),
             "scenario.json": {"case": 1, "delta": {"value": 0.1, "unit": "pu"}, "reserve": False,
                               "reserve_tau": {"value": 1, "unit": "h"}}}
    for name, doc in files.items():
        with open(os.path.join(OUT, name), "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


if __name__ == "__main__":
    main()
