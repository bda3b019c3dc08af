#!/usr/bin/env python3
"""Writes the bundled weld specimens and the gridded orientation map.

The gridded map stands in for a macrograph-derived cartography: the
closed-form orientation law plus a smooth low-order perturbation,
quantised to whole degrees as image processing would deliver it.
"""
import json
import math
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

THICKNESS = 30.0
HALF_ROOT = 4.25       # D
BEVEL_DEG = 17.8       # alpha
BUTTERING = 8.0        # horizontal width of the buttering layer
CLADDING = 3.0         # inner cladding under the ferritic pipe
EXTENT = 100.0
OGILVY = {"D": HALF_ROOT, "alpha_deg": BEVEL_DEG, "T": 0.75, "eta": 1.0}

GRID_SPACING = 0.5
GRID_MARGIN = 2.0
GRID_SMOOTH_MM = 1.0


def ogilvy_deg(x, z):
    if x == 0.0:
        return -90.0
    c = OGILVY["T"] * (HALF_ROOT + z * math.tan(math.radians(BEVEL_DEG)))
    t = math.degrees(math.atan(c / abs(x) ** OGILVY["eta"]))
    return t if x > 0 else -t


def wrap_deg(t):
    while t <= -90.0:
        t += 180.0
    while t > 90.0:
        t -= 180.0
    return t


def r4(v):
    return round(v, 4)


def regions(weld_orientation):
    slope = math.tan(math.radians(BEVEL_DEG))
    cap = HALF_ROOT + THICKNESS * slope
    b0, b1 = HALF_ROOT + BUTTERING, cap + BUTTERING
    clad = b0 + CLADDING * slope
    return [
        {"name": "weld", "kind": "weld", "material": "weld",
         "polygon": [[-HALF_ROOT, 0], [HALF_ROOT, 0], [r4(cap), THICKNESS], [r4(-cap), THICKNESS]],
         "orientation": weld_orientation},
        {"name": "buttering", "kind": "buttering", "material": "buttering",
         "polygon": [[HALF_ROOT, 0], [b0, 0], [r4(clad), CLADDING], [r4(b1), THICKNESS],
                     [r4(cap), THICKNESS]],
         "orientation": {"constant": 90.0}},
        {"name": "cladding", "kind": "stainless", "material": "stainless",
         "polygon": [[b0, 0], [EXTENT, 0], [EXTENT, CLADDING], [r4(clad), CLADDING]]},
        {"name": "ferritic pipe", "kind": "ferritic", "material": "ferritic",
         "polygon": [[r4(clad), CLADDING], [EXTENT, CLADDING], [EXTENT, THICKNESS], [r4(b1), THICKNESS]]},
        {"name": "stainless pipe", "kind": "stainless", "material": "stainless",
         "polygon": [[-EXTENT, 0], [-HALF_ROOT, 0], [r4(-cap), THICKNESS], [-EXTENT, THICKNESS]]},
    ]


def specimen(name, weld_orientation):
    return {
        "name": name,
        "inner_z_mm": 0.0,
        "outer_z_mm": THICKNESS,
        "materials": {
            "weld": "../materials/alloy182_weld.json",
            "buttering": "../materials/alloy182_buttering.json",
            "ferritic": "../materials/ferritic.json",
            "stainless": "../materials/stainless.json",
        },
        "regions": regions(weld_orientation),
    }


def grid_csv():
    cap = HALF_ROOT + THICKNESS * math.tan(math.radians(BEVEL_DEG))
    half = math.ceil((cap + GRID_MARGIN) / GRID_SPACING) * GRID_SPACING
    nx = int(round(2 * half / GRID_SPACING)) + 1
    nz = int(round((THICKNESS + 2 * GRID_MARGIN) / GRID_SPACING)) + 1
    lines = ["x_mm,z_mm,theta_deg"]
    for iz in range(nz):
        z = -GRID_MARGIN + iz * GRID_SPACING
        for ix in range(nx):
            x = -half + ix * GRID_SPACING
            # Even in x, so the perturbed map stays antisymmetric.
            bump = 4.0 * math.sin(2 * math.pi * z / THICKNESS) * math.cos(math.pi * x / (2 * half))
            t = ogilvy_deg(x, z) + (bump if x > 0 else -bump if x < 0 else 0.0)
            lines.append(f"{x:.3f},{z:.3f},{wrap_deg(round(t)):.1f}")
    return "\n".join(lines) + "\n"


def main():
    (DATA / "specimens").mkdir(parents=True, exist_ok=True)
    (DATA / "grids").mkdir(parents=True, exist_ok=True)
    (DATA / "grids" / "weld_cartography.csv").write_text(grid_csv())
    for name, orientation in [
        ("dmw_ogilvy", {"ogilvy": OGILVY}),
        ("dmw_grid", {"grid": "../grids/weld_cartography.csv", "smooth_mm": GRID_SMOOTH_MM}),
    ]:
        text = json.dumps(specimen(name, orientation), indent=2) + "\n"
        (DATA / "specimens" / f"{name}.json").write_text(text)


if __name__ == "__main__":
    main()
