import math

import numpy as np
import pytest

from orthocal import identification as ident
from orthocal import kinematics as kin
from orthocal import leg_model as lm
from orthocal.errors import EmptyVector, RankDeficient
from orthocal.experiments import EXPERIMENTS


def random_angles(rng):
    return ident.PostureAngles(rng.uniform(0.05, 1.0), -rng.uniform(0.05, 1.0))


class TestLayouts:
    def test_column_names(self):
        assert ident.REDUCED_COLUMNS == ("dx_y", "dx_z", "dy_x", "dy_z", "dz_x", "dz_y")
        assert ident.FULL_COLUMNS == (
            "dy_x_max", "dz_x_max", "dy_x_min", "dz_x_min",
            "dz_y_max", "dx_y_max", "dz_y_min", "dx_y_min",
            "dx_z_max", "dy_z_max", "dx_z_min", "dy_z_min",
        )

    def test_posture_angles_from_geometry(self, geometry):
        angles = ident.PostureAngles.from_geometry(geometry)
        assert angles.alpha_max == pytest.approx(math.asin(73.65 / 310.0))
        assert angles.alpha_min == -angles.alpha_max
        with pytest.raises(ValueError):
            ident.PostureAngles(math.pi / 2, -0.2)


class TestDesignMatrices:
    def test_full_row_pattern(self):
        angles = ident.PostureAngles(0.3, -0.25)
        b1, b2 = math.sin(0.3), math.sin(-0.25)
        c1 = (0.5 + b1) * math.tan(0.3)
        c2 = (0.5 + b2) * math.tan(-0.25)
        a = ident.design_matrix_full(angles)
        expected_x_block = np.array([
            [c1, b1, 0.0],   # dy_x_max
            [c1, 0.0, b1],   # dz_x_max
            [c2, b2, 0.0],   # dy_x_min
            [c2, 0.0, b2],   # dz_x_min
        ])
        np.testing.assert_allclose(a[:4], expected_x_block)
        # y- and z-leg blocks are cyclic column shifts of the x block
        np.testing.assert_allclose(a[4:8], expected_x_block[:, [2, 0, 1]])
        np.testing.assert_allclose(a[8:12], expected_x_block[:, [1, 2, 0]])

    def test_reduced_row_pattern(self):
        angles = ident.PostureAngles(0.3, -0.25)
        b = math.sin(0.3) - math.sin(-0.25)
        c = ((0.5 + math.sin(0.3)) * math.tan(0.3)
             - (0.5 + math.sin(-0.25)) * math.tan(-0.25))
        expected = np.array([
            [b, c, 0.0],   # dx_y
            [b, 0.0, c],   # dx_z
            [c, b, 0.0],   # dy_x
            [0.0, b, c],   # dy_z
            [c, 0.0, b],   # dz_x
            [0.0, c, b],   # dz_y
        ])
        np.testing.assert_allclose(ident.design_matrix_reduced(angles), expected)

    def test_full_matches_leg_model(self, rng):
        # the rows must reproduce the linearized gauge deltas exactly
        angles = ident.PostureAngles(0.4, -0.3)
        a = ident.design_matrix_full(angles)
        alpha = {"max": angles.alpha_max, "min": angles.alpha_min}
        for _ in range(100):
            d = rng.uniform(-5, 5, 3)
            predicted = a @ d
            stacked = []
            for leg, meas, kind in ident.FULL_LAYOUT:
                pair = lm.linearized_deviation_delta(leg, alpha[kind], d)
                slot = (kin.axis_index(meas) - kin.axis_index(leg)) % 3 - 1
                stacked.append(pair[slot])
            np.testing.assert_allclose(predicted, stacked, atol=1e-12)

    def test_reduced_is_differenced_full(self):
        angles = ident.PostureAngles(0.5, -0.35)
        diff = np.zeros((6, 12))
        for r, (leg, meas) in enumerate(ident.REDUCED_LAYOUT):
            diff[r, ident.FULL_LAYOUT.index((leg, meas, "max"))] = 1.0
            diff[r, ident.FULL_LAYOUT.index((leg, meas, "min"))] = -1.0
        np.testing.assert_allclose(ident.design_matrix_reduced(angles),
                                   diff @ ident.design_matrix_full(angles))

    def test_reduced_pure_x_offset_structure(self):
        angles = ident.PostureAngles(0.3, -0.25)
        b = math.sin(0.3) - math.sin(-0.25)
        c = ((0.5 + math.sin(0.3)) * math.tan(0.3)
             - (0.5 + math.sin(-0.25)) * math.tan(-0.25))
        v = ident.design_matrix_reduced(angles) @ np.array([1.0, 0.0, 0.0])
        expected = dict(zip(ident.REDUCED_COLUMNS, v))
        assert expected["dy_x"] == pytest.approx(c)
        assert expected["dz_x"] == pytest.approx(c)
        assert expected["dx_y"] == pytest.approx(b)
        assert expected["dx_z"] == pytest.approx(b)
        assert expected["dy_z"] == 0.0 and expected["dz_y"] == 0.0

    def test_rank(self, geometry):
        angles = ident.PostureAngles.from_geometry(geometry)
        assert np.linalg.matrix_rank(ident.design_matrix_full(angles)) == 3
        assert np.linalg.matrix_rank(ident.design_matrix_reduced(angles)) == 3
        # equal angles: the reduced (differenced) system degenerates
        equal = ident.PostureAngles(0.3, 0.3)
        assert np.linalg.matrix_rank(ident.design_matrix_reduced(equal)) == 0


class TestSolveOffsets:
    def test_exact_recovery(self, rng):
        for _ in range(50):
            angles = random_angles(rng)
            truth = rng.uniform(-5, 5, 3)
            for design in (ident.design_matrix_full(angles),
                           ident.design_matrix_reduced(angles)):
                result = ident.solve_offsets(design, design @ truth)
                assert np.max(np.abs(result.offsets - truth)) < 1e-9
                assert result.sigma_hat < 1e-9

    def test_zero_measurements(self, geometry):
        design = ident.design_matrix_reduced(ident.PostureAngles.from_geometry(geometry))
        result = ident.solve_offsets(design, np.zeros(6))
        np.testing.assert_array_equal(result.offsets, [0, 0, 0])
        np.testing.assert_array_equal(result.residuals, np.zeros(6))
        assert result.rms_before == 0.0 and result.rms_after_predicted == 0.0

    def test_residual_orthogonality(self, rng):
        for _ in range(50):
            angles = random_angles(rng)
            a = ident.design_matrix_full(angles)
            m = rng.normal(0.0, 1.0, 12)
            result = ident.solve_offsets(a, m)
            bound = 1e-9 * np.linalg.norm(a) * np.linalg.norm(m)
            assert np.linalg.norm(a.T @ result.residuals) <= bound

    def test_result_invariants(self, rng):
        angles = random_angles(rng)
        a = ident.design_matrix_full(angles)
        m = rng.normal(0.0, 0.5, 12)
        result = ident.solve_offsets(a, m)
        np.testing.assert_allclose(result.residuals, m - a @ result.offsets)
        assert result.sigma_hat == pytest.approx(
            math.sqrt(result.residuals @ result.residuals / 9))
        assert result.rms_after_predicted == pytest.approx(
            ident.rms(result.residuals))

    def test_reduced_and_full_agree_on_noise_free_data(self, rng):
        angles = ident.PostureAngles(0.35, -0.45)
        truth = np.array([1.7, -2.3, 0.9])
        full = ident.design_matrix_full(angles)
        reduced = ident.design_matrix_reduced(angles)
        est_full = ident.solve_offsets(full, full @ truth).offsets
        est_reduced = ident.solve_offsets(reduced, reduced @ truth).offsets
        assert np.max(np.abs(est_full - est_reduced)) < 1e-9

    def test_rank_deficient(self):
        design = ident.design_matrix_reduced(ident.PostureAngles(0.3, 0.3))
        with pytest.raises(RankDeficient):
            ident.solve_offsets(design, np.ones(6))

    def test_shape_validation(self, geometry):
        design = ident.design_matrix_reduced(ident.PostureAngles.from_geometry(geometry))
        with pytest.raises(ValueError):
            ident.solve_offsets(design, np.zeros(12))
        with pytest.raises(ValueError):
            ident.solve_offsets(design[:3], np.zeros(3))

    def test_sigma_hat_unbiased(self, rng):
        # full 12-row form, 9 degrees of freedom, i.i.d. Gaussian noise
        angles = ident.PostureAngles(0.45, -0.6)
        a = ident.design_matrix_full(angles)
        truth = np.array([0.8, -0.5, 0.3])
        sigma = 0.05
        clean = a @ truth
        hats = [ident.solve_offsets(a, clean + rng.normal(0, sigma, 12)).sigma_hat
                for _ in range(1500)]
        assert np.mean(hats) == pytest.approx(sigma, rel=0.10)

    def test_nonlinear_consistency(self, geometry):
        # measurements from the exact leg model instead of the linear one
        angles = ident.PostureAngles.from_geometry(geometry)
        design = ident.design_matrix_reduced(angles)
        truth = np.array([0.06, -0.05, 0.06])  # |.| ~ 0.1 mm
        measured = np.array([
            lm.exact_deviation_delta(leg, "max", geometry, truth)[
                (kin.axis_index(meas) - kin.axis_index(leg)) % 3 - 1]
            - lm.exact_deviation_delta(leg, "min", geometry, truth)[
                (kin.axis_index(meas) - kin.axis_index(leg)) % 3 - 1]
            for leg, meas in ident.REDUCED_LAYOUT
        ])
        result = ident.solve_offsets(design, measured)
        assert np.max(np.abs(result.offsets - truth)) < 1e-3


class TestPredictImprovement:
    def test_solution_gives_residuals(self, rng):
        angles = random_angles(rng)
        a = ident.design_matrix_reduced(angles)
        m = rng.normal(0, 1, 6)
        result = ident.solve_offsets(a, m)
        np.testing.assert_allclose(
            ident.predict_improvement(a, m, result.offsets), result.residuals)

    def test_zero_offsets_return_measurements(self, geometry):
        a = ident.design_matrix_reduced(ident.PostureAngles.from_geometry(geometry))
        m = np.array([0.1, -0.2, 0.3, 0.0, -0.1, 0.2])
        np.testing.assert_array_equal(ident.predict_improvement(a, m, np.zeros(3)), m)


class TestRms:
    def test_published_rows(self):
        assert ident.rms(EXPERIMENTS[1].measured) == pytest.approx(0.62, abs=0.01)
        assert ident.rms(EXPERIMENTS[2].measured) == pytest.approx(0.21, abs=0.01)

    def test_zeros(self):
        assert ident.rms((0.0, 0.0, 0.0)) == 0.0

    def test_empty(self):
        with pytest.raises(EmptyVector):
            ident.rms([])


class TestFitPostureAngles:
    def test_recovers_synthetic_angles(self, rng):
        truth_angles = ident.PostureAngles(0.62, -0.48)
        a = ident.design_matrix_reduced(truth_angles)
        truth = np.array([0.9, -1.4, 0.5])
        noise = rng.normal(0.0, 0.2, 6)
        residual = noise - a @ np.linalg.lstsq(a, noise, rcond=None)[0]
        m = a @ truth + residual
        fitted = ident.fit_posture_angles(m, residual)
        af = ident.design_matrix_reduced(fitted)
        predicted = m - af @ np.linalg.lstsq(af, m, rcond=None)[0]
        assert np.linalg.norm(predicted - residual) < 1e-4
