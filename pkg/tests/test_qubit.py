import math

import numpy as np
import pytest

from median_uncertainty.qubit import (
    QubitState,
    TwoPointDist,
    pauli_distribution,
    pauli_siqr,
    siqr_grid,
    verify_qubit_theorem,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]])


def measured(state: QubitState, op) -> tuple[float, float]:
    """Outcome probabilities (-1, +1) from the state vector; independent of the closed form."""
    vals, vecs = np.linalg.eigh(op)
    probs = np.abs(vecs.conj().T @ state.vector()) ** 2
    return float(probs[np.argmin(vals)]), float(probs[np.argmax(vals)])


class TestDistribution:
    def test_x_eigenstate(self):
        assert pauli_distribution(QubitState(1.0, 0.7), "x") == TwoPointDist(1.0, 0.0)

    def test_plus_y_eigenstate(self):
        d = pauli_distribution(QubitState(0.5, math.pi / 2), "y")
        assert d.prob_minus == pytest.approx(0.0, abs=1e-15)
        assert d.prob_plus == pytest.approx(1.0, abs=1e-15)

    def test_boundary_value(self):
        d = pauli_distribution(QubitState(0.75, math.pi / 2), "y")
        assert d.prob_minus == pytest.approx(0.5 * (1 - math.sqrt(3) / 2), abs=1e-15)
        assert d.prob_plus == pytest.approx(0.5 * (1 + math.sqrt(3) / 2), abs=1e-15)

    @pytest.mark.parametrize("p,theta", [(0.8, math.pi / 2), (0.1, 1.0), (0.5, 4.0), (0.33, 5.9)])
    def test_matches_state_vector(self, p, theta):
        s = QubitState(p, theta)
        for axis, op in (("x", SIGMA_X), ("y", SIGMA_Y)):
            d = pauli_distribution(s, axis)
            assert (d.prob_minus, d.prob_plus) == pytest.approx(measured(s, op), abs=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            QubitState(1.2, 0.0)
        with pytest.raises(ValueError):
            TwoPointDist(0.6, 0.6)
        with pytest.raises(ValueError):
            pauli_distribution(QubitState(0.5), "z")

    def test_theta_periodic(self):
        a, b = QubitState(0.3, 1.1), QubitState(0.3, 1.1 + 2 * math.pi)
        assert pauli_distribution(a, "y").prob_plus == pytest.approx(pauli_distribution(b, "y").prob_plus, abs=1e-14)


class TestSiqr:
    @pytest.mark.parametrize("probs,expected", [
        ((0.8, 0.2), 0.0),
        ((0.5, 0.5), 1.0),
        ((0.75, 0.25), 1.0),
        ((0.25, 0.75), 1.0),
        ((0.2, 0.8), 0.0),
        ((1.0, 0.0), 0.0),
    ])
    def test_values(self, probs, expected):
        assert pauli_siqr(TwoPointDist(*probs)) == expected

    def test_vectorised_rule_matches(self):
        pm = np.concatenate([np.linspace(0, 1, 401), [0.25, 0.75]])
        scalar = [pauli_siqr(TwoPointDist(float(v), 1 - float(v))) for v in pm]
        np.testing.assert_array_equal(siqr_grid(pm), scalar)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.2499, 0.25, 0.5, 0.75, 0.7501, 1.0])
    def test_x_siqr_zero_iff_outside_quarter_band(self, p):
        sx = pauli_siqr(pauli_distribution(QubitState(p), "x"))
        assert (sx == 0) == (p > 0.75 or p < 0.25)


class TestTheoremGrid:
    def test_x_eigenstate_point(self):
        s = QubitState(1.0, 0.0)
        assert pauli_siqr(pauli_distribution(s, "x")) == 0
        assert pauli_siqr(pauli_distribution(s, "y")) == 1

    def test_balanced_point(self):
        s = QubitState(0.5, 0.0)
        assert pauli_siqr(pauli_distribution(s, "x")) == 1
        assert pauli_siqr(pauli_distribution(s, "y")) == 1

    def test_report_structure(self):
        rep = verify_qubit_theorem(11, 11)
        assert rep.points == 13 * 13
        assert rep.counterexample_count == len(rep.to_dict()["counterexamples"]) or rep.counterexample_count > 20

    def test_counterexample_is_genuine(self):
        # both spreads vanish when |<sigma_x>| and |<sigma_y>| both exceed 1/2
        s = QubitState(0.8, math.pi / 2)
        px, py = measured(s, SIGMA_X), measured(s, SIGMA_Y)
        assert max(px) > 0.75 and max(py) > 0.75
        sx = pauli_siqr(TwoPointDist(*px))
        sy = pauli_siqr(TwoPointDist(*py))
        assert sx ** 2 + sy ** 2 == 0

    def test_grid_sizes_validated(self):
        with pytest.raises(ValueError):
            verify_qubit_theorem(1, 5)
