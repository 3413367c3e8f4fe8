import json
from pathlib import Path

import numpy as np
import pytest

from ontoexplain.cli import example_config_path
from ontoexplain.data_model import FeatureSchema, load_dataset
from ontoexplain.ontology import Concept, Edge, Ontology, WeightedConcept, load_ontology
from ontoexplain.uplift import load_mapping, load_rules

DATA = example_config_path().parent
PATIENT_16_ROW = 14  # sorted row of (age 35, year 63, nodes 0)

# weighted output concept sets of the Haberman worked example
UNIFORM_OUT = [
    WeightedConcept("TheSilentGeneration", 0.9),
    WeightedConcept("OperationIn1960s", 0.7),
    WeightedConcept("NoPosAxillaryNode", 0.5),
]
CONTRASTIVE_OUT = [
    WeightedConcept("TheGIGeneration", 0.6),
    WeightedConcept("OperationIn1950s", 0.3),
    WeightedConcept("OperationIn1960s", 0.5),
    WeightedConcept("NoPosAxillaryNode", 0.5),
]


def haberman_doc():
    return json.loads(example_config_path().read_text())


@pytest.fixture(scope="session")
def schema():
    return FeatureSchema.from_dict(haberman_doc()["dataset"])


@pytest.fixture(scope="session")
def haberman(schema):
    return load_dataset(DATA / "haberman.csv", schema)


@pytest.fixture(scope="session")
def onto():
    return load_ontology(DATA / "haberman_ontology.json")


@pytest.fixture(scope="session")
def rules():
    return load_rules(DATA / "haberman_blc_rules.json")


@pytest.fixture(scope="session")
def mapping():
    return load_mapping(DATA / "haberman_mapping.json")


@pytest.fixture
def config_doc(tmp_path):
    """Haberman config with absolute fixture paths, safe to mutate."""
    doc = haberman_doc()
    doc["dataset"]["path"] = str(DATA / "haberman.csv")
    for key in ("ontology", "blc_rules", "mapping"):
        doc[key] = str(DATA / doc[key])
    return doc


def random_dag(rng, n, p_edge=0.15, p_cover=0.2, extra_relations=False):
    """Random is-a DAG over c0..c{n-1}; edges only from higher to lower index."""
    concepts = [Concept(f"c{i}", covering=bool(rng.random() < p_cover)) for i in range(n)]
    edges = []
    for i in range(1, n):
        for j in range(i):
            if rng.random() < p_edge:
                edges.append(Edge(f"c{i}", f"c{j}"))
            elif extra_relations and rng.random() < p_edge / 2:
                edges.append(Edge(f"c{j}", f"c{i}", "relatedTo", float(rng.uniform(0.1, 1.0))))
    return Ontology(concepts, edges)


def write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc))
    return path


def rng(seed=0):
    return np.random.default_rng(seed)
