import math

import pytest

from qpack.errors import BoundViolationError, ValidationError
from qpack.geometry import PackingScenario
from qpack.instances import garnet_scenario
from qpack.resources import (
    ScalingInput,
    empirical_vs_bound,
    first_quant_bounds,
    scaling_input_from_scenario,
    second_quant_bounds,
    sweep_scenarios,
)

from .conftest import bound_sweep_scenarios


class TestSecondQuantBounds:
    def test_reference_evaluation(self):
        si = ScalingInput(num_radii=2, points_per_side=8, dimension=2,
                          max_radius=1.0, boundary_radius=4.0)
        b = second_quant_bounds(si)
        assert b.qubits_ceil == 128
        assert b.cnots == pytest.approx(512.0)

    def test_single_point(self):
        si = ScalingInput(1, 1, 2, 1.0, 2.0)
        assert second_quant_bounds(si).qubits_ceil == 1

    def test_three_dimensional(self):
        si = ScalingInput(num_radii=3, points_per_side=10, dimension=3,
                          max_radius=0.3, boundary_radius=1.0)
        assert second_quant_bounds(si).cnots == pytest.approx(81000.0)


class TestFirstQuantBounds:
    def test_register_width(self):
        si = ScalingInput(3, 8, 2, 1.0, 4.0)
        assert first_quant_bounds(si).register_width == 2

    def test_reference_evaluation(self):
        si = ScalingInput(3, 8, 2, 1.0, 4.0)
        b = first_quant_bounds(si)
        assert b.qubits_ceil == 128
        assert b.cnots == pytest.approx(192.0)

    def test_trivial_instance(self):
        si = ScalingInput(1, 1, 2, 1.0, 1.0)
        b = first_quant_bounds(si)
        assert b.register_width == 1
        assert b.qubits_ceil == 1

    @pytest.mark.parametrize("radii,width", [(1, 1), (2, 2), (3, 2), (4, 3), (7, 3)])
    def test_width_formula(self, radii, width):
        si = ScalingInput(radii, 4, 2, 0.5, 2.0)
        assert first_quant_bounds(si).register_width == width


class TestMonotonicity:
    BASE = dict(num_radii=2, points_per_side=6, dimension=2,
                max_radius=0.8, boundary_radius=4.0)

    def test_bounds_monotone(self):
        base = ScalingInput(**self.BASE)
        b0 = second_quant_bounds(base)
        more_radii = second_quant_bounds(ScalingInput(**{**self.BASE, "num_radii": 4}))
        finer = second_quant_bounds(ScalingInput(**{**self.BASE, "points_per_side": 9}))
        bigger_r = second_quant_bounds(ScalingInput(**{**self.BASE, "max_radius": 1.5}))
        wider_boundary = second_quant_bounds(
            ScalingInput(**{**self.BASE, "boundary_radius": 6.0})
        )
        assert more_radii.qubits >= b0.qubits and more_radii.cnots >= b0.cnots
        assert finer.qubits >= b0.qubits and finer.cnots >= b0.cnots
        assert bigger_r.cnots >= b0.cnots
        assert wider_boundary.cnots <= b0.cnots

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            ScalingInput(0, 4, 2, 1.0, 2.0)
        with pytest.raises(ValidationError):
            ScalingInput(1, 4, 4, 1.0, 2.0)
        with pytest.raises(ValidationError):
            ScalingInput(1, 4, 2, 3.0, 2.0)


class TestEmpirical:
    def test_garnet_scaling_input(self):
        si = scaling_input_from_scenario(garnet_scenario())
        assert si.points_per_side == 5
        assert si.num_radii == 1

    def test_garnet_within_bounds(self):
        rep = empirical_vs_bound(garnet_scenario())
        assert rep.actual_qubits == 18
        assert rep.qubit_bound == pytest.approx(25.0)
        assert rep.actual_terms == 25
        assert rep.actual_terms <= rep.cnot_bound
        assert rep.qubit_slack >= 1.0 and rep.cnot_slack >= 1.0

    def test_vanishing_radius_zero_edges(self):
        scn = PackingScenario(dimension=2, boundary_radius=4.0, radii=(0.05,), spacing=1.0)
        rep = empirical_vs_bound(scn)
        assert rep.actual_terms == 0

    def test_fine_lattice_reports_degree_slack(self):
        scn = PackingScenario(dimension=2, boundary_radius=3.0, radii=(1.0,), spacing=0.5)
        rep = empirical_vs_bound(scn)
        assert rep.cnot_slack >= 1.0
        # the degree reference is informational: real degree far exceeds it
        assert rep.actual_max_degree > rep.degree_reference

    def test_violation_raises(self):
        from qpack.resources import check_bounds

        with pytest.raises(BoundViolationError):
            check_bounds(10, 9.0, 0, 100.0)
        with pytest.raises(BoundViolationError):
            check_bounds(5, 9.0, 200, 100.0)

    def test_span_q_exceeds_clipped_q(self):
        rep = empirical_vs_bound(garnet_scenario())
        assert rep.span_input.points_per_side >= rep.scaling_input.points_per_side
        assert rep.cnot_bound_span >= rep.actual_terms

    def test_twenty_scenario_sweep_clean(self):
        reports = sweep_scenarios(bound_sweep_scenarios())
        assert len(reports) == 20
        for rep in reports:
            assert rep.actual_qubits <= rep.qubit_bound + 1e-9
            assert rep.actual_terms <= rep.cnot_bound_span + 1e-9

    def test_first_quantization_report(self):
        scn = PackingScenario(dimension=2, boundary_radius=2.3, radii=(1.0, 0.7),
                              spacing=1.4)
        rep = empirical_vs_bound(scn, formulation="first")
        assert rep.formulation == "first"
        assert rep.actual_qubits % 2 == 0  # width-2 registers
