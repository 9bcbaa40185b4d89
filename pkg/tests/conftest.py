import numpy as np
import pytest
from hypothesis import strategies as st

from weylsim.weyl_core import WeylIndex


#: One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def weyl_indices(draw, d=None, n=None, count=1):
    """Strategy for tuples of ``count`` Weyl indices sharing ``(d, n)``."""
    d = draw(st.sampled_from([2, 3, 5])) if d is None else d
    n = draw(st.integers(1, 3)) if n is None else n
    out = []
    for _ in range(count):
        a = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
        b = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
        out.append(WeylIndex(tuple(a), tuple(b), d))
    return tuple(out)


def random_circuit(rng, n=3, depth=6, d=2, basis="weyl"):
    """Mixed Clifford / rotation / depolarizing circuit on ``n`` qudits."""
    from weylsim.noise import CliffordGate, RotationGate, depolarizing, rotation_superop
    from weylsim.reps import Circuit, channel_to_superop

    words1 = ["F@0", "P@0", "F@0.P@0"] + (["M2@0"] if d > 2 else [])
    circ = Circuit(d, n, basis=basis)
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0:
            if n > 1 and rng.random() < 0.5:
                q = rng.choice(n, 2, replace=False)
                g = CliffordGate.from_word("CSUM@0,1", d, 2)
                circ.append(g.to_superop(tuple(int(x) for x in q), basis))
            else:
                g = CliffordGate.from_word(str(rng.choice(words1)), d, 1)
                circ.append(g.to_superop((int(rng.integers(n)),), basis))
        elif kind == 1:
            q = int(rng.integers(n))
            if d == 2:
                circ.append(rotation_superop(RotationGate(float(rng.uniform(0, 2 * np.pi)), q), basis))
            else:
                H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                U, _ = np.linalg.qr(H)
                circ.append(channel_to_superop(unitary=U, support=(q,), d=d, basis=basis))
        else:
            m = 1 if n == 1 or rng.random() < 0.5 else 2
            q = tuple(int(x) for x in rng.choice(n, m, replace=False))
            circ.append(depolarizing(float(rng.uniform(0.6, 1.0)), m, d).to_superop(q, basis))
    return circ


def random_product_state(rng, n, d=2):
    fs = []
    for _ in range(n):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        fs.append(np.outer(v, v.conj()))
    return fs


def kron_all(mats):
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out
