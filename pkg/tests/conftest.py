import numpy as np
import pytest

import tierroute as tr


def make_record(rec_id="r0", split="test", embedding=(0.0, 0.0, 0.0, 0.0),
                probs=None, conf=0.9, correct=True, label=0):
    """One hand-built record; conf/correct may be scalars or per-tier dicts."""
    if not isinstance(conf, dict):
        conf = {t: conf for t in tr.TIERS}
    if not isinstance(correct, dict):
        correct = {t: correct for t in tr.TIERS}
    return tr.SampleTrace(
        id=rec_id, split=split,
        embedding=np.asarray(embedding, dtype=float),
        epoch_true_probs=None if probs is None else np.asarray(probs, dtype=float),
        tier_conf=conf, tier_correct=correct, label=label)


def make_set(records, D=4, E=3, num_classes=2, seed=None, note="test"):
    ts = tr.TraceSet(D=D, E=E, num_classes=num_classes, seed=seed, note=note,
                     records=list(records))
    ts.validate()
    return ts


@pytest.fixture(scope="session")
def bench_traces():
    """One mid-sized benchmark trace set shared across tests."""
    return tr.generate_synthetic(tr.benchmark_spec(0, validation=500, test=800))


@pytest.fixture(scope="session")
def bench_costs():
    return tr.benchmark_costs()
