import numpy as np
import pytest

from rlsc.channels import ChannelSpec, EmissionModel
from rlsc.debt import CodeParams, Mode


@pytest.fixture(scope="session")
def packet_chain_small():
    """K=1, N=2, alpha=1 packet channel with erasure 0.3: the three-level
    debt chain whose rows are known in closed form."""
    params = CodeParams(1, 2, 1, 2, Mode.NONSYSTEMATIC)
    channel = ChannelSpec.iid(EmissionModel.packet(2, 0.7), packet_mode=True)
    return params, channel


@pytest.fixture(scope="session")
def ge_packet_channel():
    """Two-state packet channel: good delivers 80%, bad 10%."""
    return ChannelSpec.gilbert_elliott(
        0.05, 0.4, EmissionModel.packet(2, 0.8), EmissionModel.packet(2, 0.1),
        packet_mode=True)


@pytest.fixture(scope="session")
def reference_setting():
    """The binomial/all-erase two-state benchmark: K=5, N=10, alpha=4,
    delta=5, (p, r) = (1e-4, 0.5), good C ~ B(10, 0.7), bad C = 0."""
    params = CodeParams(5, 10, 4, 5, Mode.NONSYSTEMATIC)
    good = EmissionModel.binomial(10, 0.7)
    bad = EmissionModel.table([1.0] + [0.0] * 10)
    channel = ChannelSpec.gilbert_elliott(1e-4, 0.5, good, bad)
    return params, channel
