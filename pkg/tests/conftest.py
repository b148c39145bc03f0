import os
import textwrap

import numpy as np
import pytest

GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

# Two POGs, 48-inch capacity units, one unit per bay, sales weight only.
# Value curves: A = (0, 4, 10, 14, 16), B = (0, 6, 11, 13); optimum (3, 2) bays, objective 25.
DEPARTMENT_ITEMS = """\
pog_id,item_id,width_inches,price,margin,demand,in_baseline,locality
A,a1,96,5,2,2,true,Local
A,a2,48,2,1,2,false,Local
A,a3,48,1,0.5,2,false,NonLocal
B,b1,48,3,1,2,true,Local
B,b2,48,2.5,1,2,true,Local
B,b3,48,1,0.5,2,false,Local
"""

DEPARTMENT_POGS = """\
pog_id,name
A,Coffee
B,Tea
"""

DEPARTMENT_SCENARIO = """\
department_id: hot-drinks
inches_per_unit: 48
units_per_bay: 1
total_bays: 5
weights:
  sales: 1
  margin: 0
  units: 0
  similarity: 0
pogs:
  A: {min_bays: 2, max_bays: 4, multiple: 1, baseline_bays: 2}
  B: {min_bays: 1, max_bays: 3, multiple: 1, baseline_bays: 3}
"""


def write(directory, name: str, content: str) -> str:
    path = os.path.join(str(directory), name)
    with open(path, "w") as handle:
        handle.write(textwrap.dedent(content))
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def department_files(tmp_path):
    return {
        "items": write(tmp_path, "items.csv", DEPARTMENT_ITEMS),
        "pogs": write(tmp_path, "pogs.csv", DEPARTMENT_POGS),
        "scenario": write(tmp_path, "scenario.yaml", DEPARTMENT_SCENARIO),
    }


@pytest.fixture
def department_scenario(department_files):
    from bayplan.pipeline import ingest

    return ingest(department_files["items"], department_files["pogs"], department_files["scenario"])
