import csv
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def _read(name):
    with open(DATA / name, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def load_depth_table():
    """``{(K, S, v): d*}`` for the single-depth second-order table."""
    out = {}
    for row in _read("table1.csv"):
        K, S = int(row["K"]), int(row["S"])
        for key, val in row.items():
            if key.startswith("v="):
                out[(K, S, int(key[2:]))] = int(val)
    return out


def load_design_table():
    """``{(K, S, v): (depth, weight or None)}``."""
    out = {}
    for row in _read("table2.csv"):
        w = float(row["weight"]) if row["weight"] else None
        out[(int(row["K"]), int(row["S"]), int(row["v"]))] = (int(row["depth"]), w)
    return out


def load_variance_table():
    """``{(K, v): (values for d = 1..K, bold depths)}``."""
    out = {}
    for row in _read("table4.csv"):
        K, v = int(row["K"]), int(row["v"])
        vals = tuple(float(row[f"d={d}"]) for d in range(1, K + 1))
        bold = tuple(int(x) for x in row["bold"].split("|"))
        out[(K, v)] = (vals, bold)
    return out


@pytest.fixture(scope="session")
def depth_table():
    return load_depth_table()


@pytest.fixture(scope="session")
def design_table():
    return load_design_table()


@pytest.fixture(scope="session")
def variance_table():
    return load_variance_table()
