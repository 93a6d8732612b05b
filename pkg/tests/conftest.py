import json

import pytest

from ddoscast.ingest import SyntheticSpec, generate_synthetic


def record_obj(
    subclass="Total Traffic",
    start=1577836800,  # 2020-01-01T00:00:00Z
    stop=1577837400,
    max_bps=10**9,
    attack_class="Misuse",
    **extra,
):
    obj = {
        "attack_class": attack_class,
        "subclass": subclass,
        "max_bps": max_bps,
        "start": start,
        "stop": stop,
    }
    obj.update(extra)
    return obj


def as_array(*objs) -> bytes:
    return json.dumps(list(objs)).encode()


def as_ndjson(*objs) -> bytes:
    return ("\n".join(json.dumps(o) for o in objs) + "\n").encode()


@pytest.fixture(scope="session")
def synthetic_1000():
    return generate_synthetic(SyntheticSpec(record_count=1000, seed=7))
