#!/usr/bin/env python3
"""Generate the bundled feeder description files (data/ieee13.json,
data/ieee123.json) from the IEEE test feeder line/load tables.

Line impedances are ohm/mile, shunt admittances siemens/mile, lengths in
miles. Distributed loads are pre-split 50/50 onto segment end buses; delta
loads are kept as delta entries (the parser converts them to equivalent wye).
"""

import json
import os

FT = 1.0 / 5280.0  # feet -> miles

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


def zmat(rows):
    """Upper-triangular rows -> full symmetric row-major [re, im] list."""
    n = len(rows)
    full = [[None] * n for _ in range(n)]
    for i, row in enumerate(rows):
        for k, (re, im) in enumerate(row):
            j = i + k
            full[i][j] = [re, im]
            full[j][i] = [re, im]
    return [full[i][j] for i in range(n) for j in range(n)]


def bmat(rows, scale=1e-6):
    """Upper-triangular susceptance rows (uS/mile) -> complex admittance."""
    n = len(rows)
    full = [[None] * n for _ in range(n)]
    for i, row in enumerate(rows):
        for k, b in enumerate(row):
            j = i + k
            full[i][j] = [0.0, b * scale]
            full[j][i] = [0.0, b * scale]
    return [full[i][j] for i in range(n) for j in range(n)]


ZIP = {"PQ": [0.0, 0.0, 1.0], "Z": [1.0, 0.0, 0.0], "I": [0.0, 1.0, 0.0]}


def load(bus, phase, p, q, model="PQ", conn="wye"):
    return {
        "bus": str(bus),
        "phase": phase,
        "connection": conn,
        "p_kw": p,
        "q_kvar": q,
        "kp": ZIP[model],
        "kq": ZIP[model],
    }


# --------------------------------------------------------------------------
# IEEE 13-bus
# --------------------------------------------------------------------------

CFG13 = {
    # config: (phases, z upper rows, b upper rows uS/mile)
    "601": (
        "abc",
        [
            [(0.3465, 1.0179), (0.1560, 0.5017), (0.1580, 0.4236)],
            [(0.3375, 1.0478), (0.1535, 0.3849)],
            [(0.3414, 1.0348)],
        ],
        [[6.2998, -1.9958, -1.2595], [5.9597, -0.7417], [5.6386]],
    ),
    "602": (
        "abc",
        [
            [(0.7526, 1.1814), (0.1580, 0.4236), (0.1560, 0.5017)],
            [(0.7475, 1.1983), (0.1535, 0.3849)],
            [(0.7436, 1.2112)],
        ],
        [[5.6990, -1.0817, -1.6905], [5.1795, -0.6588], [5.4246]],
    ),
    "603": (
        "bc",
        [[(1.3294, 1.3471), (0.2066, 0.4591)], [(1.3238, 1.3569)]],
        [[4.7097, -0.8999], [4.6658]],
    ),
    "604": (
        "ac",
        [[(1.3238, 1.3569), (0.2066, 0.4591)], [(1.3294, 1.3471)]],
        [[4.6658, -0.8999], [4.7097]],
    ),
    "605": ("c", [[(1.3292, 1.3475)]], [[4.5193]]),
    "606": (
        "abc",
        [
            [(0.7982, 0.4463), (0.3192, 0.0328), (0.2849, -0.0143)],
            [(0.7891, 0.4041), (0.3192, 0.0328)],
            [(0.7982, 0.4463)],
        ],
        [[96.8897, 0.0, 0.0], [96.8897, 0.0], [96.8897]],
    ),
    "607": ("a", [[(1.3425, 0.5124)]], [[88.9912]]),
}

LINES13 = [
    # from, to, config, length ft
    ("650", "632", "601", 2000),
    ("632", "633", "602", 500),
    ("632", "645", "603", 500),
    ("632", "671", "601", 2000),
    ("645", "646", "603", 300),
    ("671", "680", "601", 1000),
    ("671", "684", "604", 300),
    ("684", "611", "605", 300),
    ("684", "652", "607", 800),
    ("692", "675", "606", 500),
]


def branch(frm, to, cfg_table, cfg, length_ft):
    phases, zr, br = cfg_table[cfg]
    return {
        "from": str(frm),
        "to": str(to),
        "kind": "line",
        "phases": phases,
        "length": length_ft * FT,
        "z_ohms_per_unit_length": zmat(zr),
        "y_shunt_siemens": bmat(br),
    }


def xfmr(frm, to, phases, r_ohm, x_ohm):
    n = len(phases)
    z = [[r_ohm, x_ohm] if i == j else [0.0, 0.0] for i in range(n) for j in range(n)]
    return {
        "from": str(frm),
        "to": str(to),
        "kind": "transformer",
        "phases": phases,
        "length": 1.0,
        "z_ohms_per_unit_length": z,
    }


def switch(frm, to, phases):
    return {"from": str(frm), "to": str(to), "kind": "switch", "phases": phases, "length": 1.0}


def ieee13():
    buses = [
        {"id": "650", "phases": "abc", "kv_ll": 4.16, "root": True},
        {"id": "632", "phases": "abc", "kv_ll": 4.16},
        {"id": "633", "phases": "abc", "kv_ll": 4.16},
        {"id": "634", "phases": "abc", "kv_ll": 0.48},
        {"id": "645", "phases": "bc", "kv_ll": 4.16},
        {"id": "646", "phases": "bc", "kv_ll": 4.16},
        {"id": "671", "phases": "abc", "kv_ll": 4.16},
        {"id": "680", "phases": "abc", "kv_ll": 4.16},
        {"id": "684", "phases": "ac", "kv_ll": 4.16},
        {"id": "611", "phases": "c", "kv_ll": 4.16},
        {"id": "652", "phases": "a", "kv_ll": 4.16},
        {"id": "692", "phases": "abc", "kv_ll": 4.16},
        {"id": "675", "phases": "abc", "kv_ll": 4.16},
    ]
    branches = [branch(f, t, CFG13, c, l) for f, t, c, l in LINES13]
    # XFM-1 500 kVA 4.16/0.48, Z = 1.1 + j2 % on rating, referred to the LV side
    zb_lv = 0.48 ** 2 / 0.5
    branches.append(xfmr("633", "634", "abc", 0.011 * zb_lv, 0.02 * zb_lv))
    branches.append(switch("671", "692", "abc"))

    # Load magnitudes are raised uniformly above the nameplate values so that
    # the uncontrolled feeder (caps off, regulator neutral) exhibits
    # undervoltage across most of the 0.8-1.2x operating range, which is the
    # regime the control study targets. Proportions and placements are the
    # standard ones.
    s = 1.4
    loads = [
        load(634, "a", s * 160, s * 110),
        load(634, "b", s * 120, s * 90),
        load(634, "c", s * 120, s * 90),
        load(645, "b", s * 170, s * 125),
        load(646, "b", s * 230, s * 132, "Z", "delta"),
        load(652, "a", s * 128, s * 86, "Z"),
        load(671, "a", s * 385, s * 220, "PQ", "delta"),
        load(671, "b", s * 385, s * 220, "PQ", "delta"),
        load(671, "c", s * 385, s * 220, "PQ", "delta"),
        load(675, "a", s * 485, s * 190),
        load(675, "b", s * 68, s * 60),
        load(675, "c", s * 290, s * 212),
        load(692, "c", s * 170, s * 151, "I", "delta"),
        load(611, "c", s * 170, s * 80, "I"),
        # distributed load 632-671, split 50/50 onto the end buses
        load(632, "a", s * 8.5, s * 5),
        load(632, "b", s * 33, s * 19),
        load(632, "c", s * 58.5, s * 34),
        load(671, "a", s * 8.5, s * 5),
        load(671, "b", s * 33, s * 19),
        load(671, "c", s * 58.5, s * 34),
    ]

    capacitors = [
        {"bus": "675", "phase": "a", "kvar_nominal": 200},
        {"bus": "675", "phase": "b", "kvar_nominal": 200},
        {"bus": "675", "phase": "c", "kvar_nominal": 200},
        {"bus": "611", "phase": "c", "kvar_nominal": 100},
    ]
    regulators = [{"from": "650", "to": "632", "phases": "abc"}]
    dg_units = [
        {"bus": "675", "phase": "a", "s_kva": 100, "p_kw": 80, "smart_inverter": False},
        {"bus": "680", "phase": "a", "s_kva": 100, "p_kw": 80, "smart_inverter": False},
        {"bus": "680", "phase": "b", "s_kva": 100, "p_kw": 80, "smart_inverter": False},
        {"bus": "680", "phase": "c", "s_kva": 100, "p_kw": 80, "smart_inverter": False},
        {"bus": "684", "phase": "c", "s_kva": 100, "p_kw": 80, "smart_inverter": True},
    ]

    return {
        "base": {"mva": 5.0, "kv_ll": 4.16},
        "buses": buses,
        "branches": branches,
        "loads": loads,
        "capacitors": capacitors,
        "regulators": regulators,
        "dg_units": dg_units,
    }


# --------------------------------------------------------------------------
# IEEE 123-bus
# --------------------------------------------------------------------------

# Base overhead 336,400 26/7 ACSR construction; configs 1-6 are phase
# rotations of the same build.
Z_OH = [
    [(0.4576, 1.0780), (0.1560, 0.5017), (0.1535, 0.3849)],
    [(0.4666, 1.0482), (0.1580, 0.4236)],
    [(0.4615, 1.0651)],
]
B_OH = [[5.6765, -1.8319, -0.6982], [5.9809, -1.1645], [5.3971]]

# phase order of base rows per config (row i of the base matrices sits on
# PERM[cfg][i])
PERM = {1: "abc", 2: "cab", 3: "bca", 4: "cba", 5: "bac", 6: "acb"}


def permute(rows_upper, order):
    n = 3
    full = [[None] * n for _ in range(n)]
    for i, row in enumerate(rows_upper):
        for k, v in enumerate(row):
            j = i + k
            full[i][j] = v
            full[j][i] = v
    pos = {p: idx for idx, p in enumerate(order)}
    out = [[None] * n for _ in range(n)]
    for i, pi in enumerate("abc"):
        for j, pj in enumerate("abc"):
            out[i][j] = full[pos[pi]][pos[pj]]
    return [[out[i][j] for j in range(i, n)] for i in range(n)]


def cfg123():
    table = {}
    for c, order in PERM.items():
        table[str(c)] = ("abc", permute(Z_OH, order), permute(B_OH, order))
    table["7"] = (
        "ac",
        [[(0.4576, 1.0780), (0.1535, 0.3849)], [(0.4615, 1.0651)]],
        [[5.1154, -1.0549], [5.1704]],
    )
    table["8"] = (
        "ab",
        [[(0.4576, 1.0780), (0.1535, 0.3849)], [(0.4615, 1.0651)]],
        [[5.1154, -1.0549], [5.1704]],
    )
    one_ph = [[(1.3292, 1.3475)]]
    one_b = [[4.5193]]
    table["9"] = ("a", one_ph, one_b)
    table["10"] = ("b", one_ph, one_b)
    table["11"] = ("c", one_ph, one_b)
    table["12"] = (
        "abc",
        [
            [(1.5209, 0.7521), (0.5198, 0.2775), (0.4924, 0.2157)],
            [(1.5329, 0.7162), (0.5198, 0.2775)],
            [(1.5209, 0.7521)],
        ],
        [[89.8380, 0.0, 0.0], [89.8380, 0.0], [89.8380]],
    )
    return table


LINES123 = [
    (1, 2, 10, 175), (1, 3, 11, 250), (1, 7, 1, 300),
    (3, 4, 11, 200), (3, 5, 11, 325), (5, 6, 11, 250),
    (7, 8, 1, 200), (8, 12, 10, 225), (8, 9, 9, 225), (8, 13, 1, 300),
    (9, 14, 9, 425), (13, 34, 11, 150), (13, 18, 2, 825),
    (14, 11, 9, 250), (14, 10, 9, 250),
    (15, 16, 11, 375), (15, 17, 11, 350),
    (18, 19, 9, 250), (18, 21, 2, 300), (19, 20, 9, 325),
    (21, 22, 10, 525), (21, 23, 2, 250), (23, 24, 11, 550), (23, 25, 2, 275),
    (25, 26, 7, 350), (25, 28, 2, 200), (26, 27, 7, 275), (26, 31, 11, 225),
    (27, 33, 9, 500), (28, 29, 2, 300), (29, 30, 2, 350), (30, 250, 2, 200),
    (31, 32, 11, 300), (34, 15, 11, 100),
    (35, 36, 8, 650), (35, 40, 1, 250), (36, 37, 9, 300), (36, 38, 10, 250),
    (38, 39, 10, 325), (40, 41, 11, 325), (40, 42, 1, 250),
    (42, 43, 10, 500), (42, 44, 1, 200), (44, 45, 9, 200), (44, 47, 1, 250),
    (45, 46, 9, 300), (47, 48, 4, 150), (47, 49, 4, 250), (49, 50, 4, 250),
    (50, 51, 4, 250), (52, 53, 1, 200), (53, 54, 1, 125), (54, 55, 1, 275),
    (54, 57, 3, 350), (55, 56, 1, 275), (57, 58, 10, 250), (57, 60, 3, 750),
    (58, 59, 10, 250), (60, 61, 5, 550), (60, 62, 12, 250),
    (62, 63, 12, 175), (63, 64, 12, 350), (64, 65, 12, 425), (65, 66, 12, 325),
    (67, 68, 9, 200), (67, 72, 3, 275), (67, 97, 3, 250),
    (68, 69, 9, 275), (69, 70, 9, 325), (70, 71, 9, 275),
    (72, 73, 11, 275), (72, 76, 3, 200), (73, 74, 11, 350), (74, 75, 11, 400),
    (76, 77, 6, 400), (76, 86, 3, 700), (77, 78, 6, 100), (78, 79, 6, 225),
    (78, 80, 6, 475), (80, 81, 6, 475), (81, 82, 6, 250), (81, 84, 11, 675),
    (82, 83, 6, 250), (84, 85, 11, 475),
    (86, 87, 6, 450), (87, 88, 9, 175), (87, 89, 6, 275),
    (89, 90, 10, 225), (89, 91, 6, 225), (91, 92, 11, 300), (91, 93, 6, 225),
    (93, 94, 9, 275), (93, 95, 6, 300), (95, 96, 10, 200),
    (97, 98, 3, 275), (98, 99, 3, 550), (99, 100, 3, 300), (100, 450, 3, 800),
    (101, 102, 11, 225), (101, 105, 3, 275), (102, 103, 11, 325),
    (103, 104, 11, 700), (105, 106, 10, 225), (105, 108, 3, 325),
    (106, 107, 10, 575), (108, 109, 9, 450), (108, 300, 3, 1000),
    (109, 110, 9, 300), (110, 111, 9, 575), (110, 112, 9, 125),
    (112, 113, 9, 525), (113, 114, 9, 325),
    (135, 35, 4, 375), (149, 1, 1, 400), (152, 52, 1, 400),
    (60, 67, 6, 350), (197, 101, 3, 250),
]

SWITCHES123 = [
    (13, 152, "abc"),
    (18, 135, "abc"),
    (97, 197, "abc"),
    (300, 151, "abc"),
]

LOADS123 = [
    (1, "a", 40, 20, "PQ"), (2, "b", 20, 10, "PQ"), (4, "c", 40, 20, "PQ"),
    (5, "c", 20, 10, "I"), (6, "c", 40, 20, "Z"), (7, "a", 20, 10, "PQ"),
    (9, "a", 40, 20, "PQ"), (10, "a", 20, 10, "I"), (11, "a", 40, 20, "Z"),
    (12, "b", 20, 10, "PQ"), (16, "c", 40, 20, "PQ"), (17, "c", 20, 10, "PQ"),
    (19, "a", 40, 20, "PQ"), (20, "a", 40, 20, "I"), (22, "b", 40, 20, "Z"),
    (24, "c", 40, 20, "PQ"), (28, "a", 40, 20, "I"), (29, "a", 40, 20, "Z"),
    (30, "c", 40, 20, "PQ"), (31, "c", 20, 10, "PQ"), (32, "c", 20, 10, "PQ"),
    (33, "a", 40, 20, "I"), (34, "c", 40, 20, "Z"), (35, "a", 40, 20, "PQ"),
    (37, "a", 40, 20, "Z"), (38, "b", 20, 10, "I"), (39, "b", 20, 10, "PQ"),
    (41, "c", 20, 10, "PQ"), (42, "a", 20, 10, "PQ"), (43, "b", 40, 20, "Z"),
    (45, "a", 20, 10, "I"), (46, "a", 20, 10, "PQ"),
    (47, "a", 35, 25, "I"), (47, "b", 35, 25, "I"), (47, "c", 35, 25, "I"),
    (48, "a", 70, 50, "Z"), (48, "b", 70, 50, "Z"), (48, "c", 70, 50, "Z"),
    (49, "a", 35, 25, "PQ"), (49, "b", 70, 50, "PQ"), (49, "c", 35, 20, "PQ"),
    (50, "c", 40, 20, "PQ"), (51, "a", 20, 10, "PQ"), (52, "a", 40, 20, "PQ"),
    (53, "a", 40, 20, "PQ"), (55, "a", 20, 10, "Z"), (56, "b", 20, 10, "PQ"),
    (58, "b", 20, 10, "I"), (59, "b", 20, 10, "PQ"), (60, "a", 20, 10, "PQ"),
    (62, "c", 40, 20, "Z"), (63, "a", 40, 20, "PQ"), (64, "b", 75, 35, "I"),
    (65, "a", 35, 25, "Z"), (65, "b", 35, 25, "Z"), (65, "c", 70, 50, "Z"),
    (66, "c", 75, 35, "PQ"), (68, "a", 20, 10, "PQ"), (69, "a", 40, 20, "PQ"),
    (70, "a", 20, 10, "I"), (71, "a", 40, 20, "PQ"), (73, "c", 40, 20, "PQ"),
    (74, "c", 40, 20, "Z"), (75, "c", 40, 20, "PQ"),
    (76, "a", 105, 80, "I"), (76, "b", 70, 50, "I"), (76, "c", 70, 50, "I"),
    (77, "b", 40, 20, "PQ"), (79, "a", 40, 20, "Z"), (80, "b", 40, 20, "I"),
    (82, "a", 40, 20, "PQ"), (83, "c", 20, 10, "PQ"), (84, "c", 20, 10, "PQ"),
    (85, "c", 40, 20, "PQ"), (86, "b", 20, 10, "PQ"), (87, "b", 40, 20, "PQ"),
    (88, "a", 40, 20, "PQ"), (90, "b", 40, 20, "I"), (92, "c", 40, 20, "PQ"),
    (94, "a", 40, 20, "PQ"), (95, "b", 20, 10, "PQ"), (96, "b", 20, 10, "PQ"),
    (98, "a", 40, 20, "PQ"), (99, "b", 40, 20, "PQ"), (100, "c", 40, 20, "Z"),
    (102, "c", 20, 10, "PQ"), (103, "c", 40, 20, "PQ"), (104, "c", 40, 20, "PQ"),
    (106, "b", 40, 20, "PQ"), (107, "b", 40, 20, "PQ"), (109, "a", 40, 20, "PQ"),
    (111, "a", 20, 10, "PQ"), (112, "a", 20, 10, "I"), (113, "a", 40, 20, "Z"),
    (114, "a", 20, 10, "PQ"),
]


def ieee123():
    table = cfg123()
    branches = []
    bus_phases = {}

    def widen(bus, phases):
        cur = bus_phases.get(str(bus), "")
        for p in phases:
            if p not in cur:
                cur += p
        bus_phases[str(bus)] = "".join(sorted(cur))

    for f, t, c, l in LINES123:
        br = branch(f, t, table, str(c), l)
        branches.append(br)
        widen(f, br["phases"])
        widen(t, br["phases"])
    for f, t, ph in SWITCHES123:
        branches.append(switch(f, t, ph))
        widen(f, ph)
        widen(t, ph)
    # regulator branch at the substation; the other banks sit on line branches
    branches.append({"from": "150", "to": "149", "kind": "regulator", "phases": "abc", "length": 1.0})
    widen(150, "abc")
    widen(149, "abc")
    # XFM-1 150 kVA 4.16/0.48, Z = 1.27 + j2.72 % referred to the LV side
    zb_lv = 0.48 ** 2 / 0.15
    branches.append(xfmr(61, 610, "abc", 0.0127 * zb_lv, 0.0272 * zb_lv))
    widen(61, "abc")
    widen(610, "abc")

    buses = []
    for bid in sorted(bus_phases, key=lambda s: (len(s), s)):
        entry = {"id": bid, "phases": bus_phases[bid], "kv_ll": 0.48 if bid == "610" else 4.16}
        if bid == "150":
            entry["root"] = True
        buses.append(entry)

    loads = [load(b, ph, p, q, m) for b, ph, p, q, m in LOADS123]

    capacitors = [
        {"bus": "83", "phase": "a", "kvar_nominal": 200},
        {"bus": "83", "phase": "b", "kvar_nominal": 200},
        {"bus": "83", "phase": "c", "kvar_nominal": 200},
        {"bus": "88", "phase": "a", "kvar_nominal": 50},
        {"bus": "90", "phase": "b", "kvar_nominal": 50},
        {"bus": "92", "phase": "c", "kvar_nominal": 50},
    ]
    regulators = [
        {"from": "150", "to": "149", "phases": "abc"},
        {"from": "9", "to": "14", "phases": "a"},
        {"from": "25", "to": "26", "phases": "ac"},
        {"from": "60", "to": "67", "phases": "abc"},
    ]

    def dg(bus, phase, s, p, smart):
        return {"bus": str(bus), "phase": phase, "s_kva": s, "p_kw": p, "smart_inverter": smart}

    dg_units = [
        dg(13, "c", 300, 240, True),
        dg(18, "a", 166.7, 133.3, True),
        dg(18, "b", 166.7, 133.3, True),
        dg(18, "c", 166.7, 133.3, True),
        dg(60, "a", 166.7, 133.3, True),
        dg(60, "b", 166.7, 133.3, True),
        dg(60, "c", 166.7, 133.3, True),
        dg(151, "a", 100, 80, False),
        dg(151, "b", 100, 80, False),
        dg(151, "c", 100, 80, False),
        dg(250, "a", 100, 80, False),
        dg(250, "b", 100, 80, False),
        dg(250, "c", 100, 80, False),
        dg(300, "a", 100, 80, False),
        dg(300, "b", 100, 80, False),
        dg(300, "c", 100, 80, False),
    ]

    return {
        "base": {"mva": 5.0, "kv_ll": 4.16},
        "buses": buses,
        "branches": branches,
        "loads": loads,
        "capacitors": capacitors,
        "regulators": regulators,
        "dg_units": dg_units,
    }


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, data in [("ieee13.json", ieee13()), ("ieee123.json", ieee123())]:
        path = os.path.join(OUT_DIR, name)
        with open(path, "w") as f:
            json.dump(data, f, indent=1)
            f.write("\n")
        print(f"wrote {path}: {len(data['buses'])} buses, {len(data['branches'])} branches")


if __name__ == "__main__":
    main()
