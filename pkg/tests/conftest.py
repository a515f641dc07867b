import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

from lielat.ring import make_ring  # noqa: E402

RING_SPECS = {
    "Z/3": dict(p=3),
    "Z/9": dict(p=3, m=2),
    "Z/27": dict(p=3, m=3),
    "Z/25": dict(p=5, m=2),
    "GR(3,2,2)": dict(p=3, f=2, m=2, defining_data=[1, 0, 1]),
    "Eis(3,3)": dict(p=3, e=2, m=3, defining_data=[3, 0, 1]),
    "Eis(5,4)": dict(p=5, e=2, m=4, defining_data=[-5, 0, 1]),
}


@pytest.fixture(params=sorted(RING_SPECS))
def ring(request):
    return make_ring(**RING_SPECS[request.param])
