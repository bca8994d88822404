import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgkit import kernels, lgi, macroreal

BACKENDS = kernels.available_backends()
needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        kernels._pick("fortran")


@needs_ext
@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 10), data=st.data())
def test_extrema_backends_agree(n, data):
    signs = data.draw(st.sampled_from(lgi.odd_sign_patterns(n)))
    terms = lgi.kn_terms(n, signs)
    ii = [i - 1 for _, i, _ in terms]
    jj = [j - 1 for _, _, j in terms]
    coeff = data.draw(st.lists(st.floats(-2, 2), min_size=n, max_size=n))
    a = kernels.lg_string_extrema(n, ii, jj, coeff, 0.5, backend="python")
    b = kernels.lg_string_extrema(n, ii, jj, coeff, 0.5, backend="cython")
    assert np.allclose(a, b, atol=1e-12)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), states=st.integers(1, 6), length=st.integers(1, 5),
       nim=st.booleans())
def test_ontic_joint_backends_agree(seed, states, length, nim):
    rng = macroreal.make_rng(seed)
    model = macroreal.random_model(rng, 3, states, nim=nim)
    seq = rng.integers(0, 3, size=length)
    a = kernels.ontic_sequence_joint(model.mu, model.xi, model.gamma, seq, backend="python")
    b = kernels.ontic_sequence_joint(model.mu, model.xi, model.gamma, seq, backend="cython")
    assert a.shape == (2 ** length,)
    assert np.allclose(a, b, atol=1e-14)


def test_read_only_inputs_accepted():
    model = macroreal.random_model(macroreal.make_rng(0), 2, 3)
    assert not model.mu.flags.writeable
    for backend in BACKENDS:
        out = kernels.ontic_sequence_joint(model.mu, model.xi, model.gamma, [0, 1], backend=backend)
        assert out.sum() == pytest.approx(1.0)


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, LGKIT_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import lgkit; print(lgkit.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
