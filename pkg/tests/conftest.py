import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_channel(rng, Nt, K=None):
    shape = (Nt,) if K is None else (Nt, K)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_precoder(rng, Nt, K, Pt, mode="RS", fill=None):
    from ratesplit import Precoder, PrecoderMode

    mode = PrecoderMode(mode)
    pc = (rng.standard_normal(Nt) + 1j * rng.standard_normal(Nt))
    if mode is PrecoderMode.NoRS:
        pc = np.zeros(Nt, dtype=np.complex128)
    Pp = rng.standard_normal((Nt, K)) + 1j * rng.standard_normal((Nt, K))
    P = Precoder(pc, Pp, mode)
    frac = rng.uniform(0.3, 1.0) if fill is None else fill
    scale = np.sqrt(frac * Pt / P.total_power)
    return Precoder(pc * scale, Pp * scale, mode)
