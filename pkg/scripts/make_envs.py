"""Regenerate the bundled benchmark maps and scenarios in src/smtnav/data."""

import json
from pathlib import Path

import numpy as np

from smtnav.gridmap import CellState, OccupancyGrid, save_map

DATA = Path(__file__).resolve().parents[1] / "src" / "smtnav" / "data"
RES = 0.05
ORIGIN = (-0.5, -0.5, 0.0)  # 10 m room plus 0.5 m margin on each side

# walls are four bars; the corner gaps keep them separate components
WALLS = [(-0.1, -0.1, 10.1, 0.0), (-0.1, 10.0, 10.1, 10.1), (-0.1, 0.1, 0.0, 9.9), (10.0, 0.1, 10.1, 9.9)]

ENVIRONMENTS = {
    "env1": [(2.0, 2.0, 3.5, 4.0), (5.0, 5.0, 6.0, 8.5), (6.5, 1.5, 8.5, 3.0), (2.0, 6.5, 4.0, 7.5)],
    "env2": [
        (1.5, 1.0, 2.5, 6.0), (3.5, 4.0, 4.5, 9.5), (5.5, 0.5, 6.5, 5.5),
        (7.5, 3.0, 8.5, 9.0), (1.0, 7.5, 2.5, 8.5), (8.8, 0.8, 9.6, 1.8),
    ],
}

SCENARIOS = {
    "env1-a": ("env1", [50, 50, 0], [900, 900, 0]),
    "env1-b": ("env1", [100, 900, 0], [900, 150, 0]),
    "env2-a": ("env2", [50, 50, 0], [950, 950, 0]),
}


def rasterize(boxes):
    size = round(11.0 / RES)
    cells = np.full((size, size), CellState.FREE, dtype=np.int8)
    # unseen patches outside the room; a closed unknown ring would box the whole map
    cells[:4, 20:90] = cells[-4:, 120:200] = cells[30:110, :4] = CellState.UNKNOWN
    for x0, y0, x1, y1 in boxes:
        c0, c1 = round((x0 - ORIGIN[0]) / RES), round((x1 - ORIGIN[0]) / RES)
        r0, r1 = round((y0 - ORIGIN[1]) / RES), round((y1 - ORIGIN[1]) / RES)
        cells[r0:r1, c0:c1] = CellState.OCCUPIED
    return OccupancyGrid(size, size, RES, ORIGIN, cells)


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, boxes in ENVIRONMENTS.items():
        save_map(rasterize(WALLS + boxes), DATA / f"{name}.yaml")
    for name, (env, init, goal) in SCENARIOS.items():
        scenario = {
            "name": name,
            "map": f"{env}.yaml",
            "units_per_meter": 100,
            "workspace": [0, 0, 1000, 1000],
            "init": init,
            "goal": goal,
            "m_min": 2,
            "m_max": 20,
            "v": 400,
            "r": 15,
            "cell_size": 5,
            "planners": ["smt", "bfs", "astar"],
            "timeout": 60,
            "seed": 0,
        }
        (DATA / f"{name}.json").write_text(json.dumps(scenario, indent=2) + "\n")


if __name__ == "__main__":
    main()
