import math

import numpy as np
import pytest

from subwave.errors import NumericError, ValidationError
from subwave.wavelets import (
    Envelope,
    box_envelope,
    daubechies_filter,
    envelope_constant,
    eval_dilated,
    exponential_envelope,
    lipschitz_fit,
    make_basis,
    rational_envelope,
    tail_constant,
)


class TestHaar:
    def test_mother_values(self, haar):
        assert haar.m_wavelet(0.25) == 1.0
        assert haar.m_wavelet(0.75) == -1.0
        assert haar.m_wavelet(1.5) == 0.0
        assert haar.f_wavelet(0.5) == 1.0

    def test_m_hat_zero_at_origin(self, haar):
        assert abs(haar.m_hat(0.0)) < 1e-12

    def test_flagged_discontinuous(self, haar):
        assert haar.continuous is False


class TestMakeBasis:
    @pytest.mark.parametrize("bad", ["sym4", "daubechies:5", "daubechies:x", "meyerr"])
    def test_unknown_family(self, bad):
        with pytest.raises(ValidationError):
            make_basis(bad)

    def test_daubechies_filter_reference_values(self):
        # db2 filter, classical table values
        h = daubechies_filter(2)
        ref = np.array([0.4829629131445341, 0.8365163037378079,
                        0.2241438680420134, -0.1294095225512604])
        assert np.allclose(h, ref, atol=1e-12)
        for n in (2, 3, 4):
            h = daubechies_filter(n)
            assert np.sum(h) == pytest.approx(math.sqrt(2.0), rel=1e-12)
            # orthonormality of even shifts
            for s in range(1, n):
                assert abs(np.dot(h[2 * s :], h[: len(h) - 2 * s])) < 1e-12

    def test_continuous_families_flagged(self, db2, meyer):
        assert db2.continuous and meyer.continuous


class TestEvalDilated:
    def test_haar_base_level(self, haar):
        assert eval_dilated(haar, "m", 0, 0, 0.25) == 1.0

    def test_haar_dilation(self, haar):
        # 2^{1/2} psi(0.25)
        assert eval_dilated(haar, "m", 1, 0, 0.125) == pytest.approx(math.sqrt(2.0))

    def test_outside_support_is_zero(self, db2, meyer):
        assert eval_dilated(db2, "m", 2, 5, 10.0) == 0.0
        assert eval_dilated(meyer, "m", 2, 5, 1e5) == 0.0

    def test_rejects_bad_args(self, haar):
        with pytest.raises(ValidationError):
            eval_dilated(haar, "m", -1, 0, 0.0)
        with pytest.raises(ValidationError):
            eval_dilated(haar, "g", 0, 0, 0.0)

    @pytest.mark.parametrize("j", [0, 1, 2, 3, 4])
    def test_l2_normalization(self, db3, j):
        h = 2.0**-14
        t = np.arange(0.0, 5.0 / 2**j + h, h)
        vals = eval_dilated(db3, "m", j, 0, t)
        assert np.sum(vals**2) * h == pytest.approx(1.0, abs=1e-4)


class TestEnvelopes:
    def test_envelope_constant_exponential(self):
        env = exponential_envelope()
        assert envelope_constant(env) == pytest.approx(3.0 + 4.0 * math.exp(-0.5), rel=1e-12)

    def test_envelope_constant_box(self):
        assert envelope_constant(box_envelope(1.0, 1.0)) == pytest.approx(5.0)

    def test_envelope_constant_linear_in_phi(self):
        assert envelope_constant(box_envelope(2.0, 1.0)) == pytest.approx(10.0)
        assert envelope_constant(exponential_envelope(amplitude=2.0)) == pytest.approx(
            2.0 * (3.0 + 4.0 * math.exp(-0.5))
        )

    def test_tail_constant_exponential(self):
        env = exponential_envelope()
        assert tail_constant(env, 1.0, 3) == pytest.approx(
            math.exp(-1.0) + math.exp(-2.0), rel=1e-12
        )

    def test_tail_constant_box_vanishes(self):
        assert tail_constant(box_envelope(1.0, 1.0), 1.0, 3) == 0.0

    def test_tail_constant_hypothesis(self):
        with pytest.raises(ValidationError):
            tail_constant(exponential_envelope(), 3.0, 3)

    def test_tail_constant_vanishes_monotonically(self):
        env = exponential_envelope()
        vals = [tail_constant(env, 1.0, k1) for k1 in (3, 5, 9, 17)]
        assert all(b < a for a, b in zip(vals[:-1], vals[1:]))
        assert vals[-1] < 1e-6

    def test_increasing_envelope_rejected(self):
        with pytest.raises(ValidationError):
            Envelope(
                big_phi=lambda x: 1.0 + np.asarray(x),
                total_integral=1.0,
                tail_integral=lambda a: 1.0,
            )

    def test_tail_total_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            Envelope(
                big_phi=lambda x: np.exp(-np.asarray(x)),
                total_integral=1.0,
                tail_integral=lambda a: 0.5 * math.exp(-a),
            )

    def test_effective_support_box(self):
        s = box_envelope(1.0, 3.0).effective_support(1e-6)
        assert s == pytest.approx(3.0, abs=1e-4)

    @pytest.mark.parametrize("family", ["haar", "daubechies:3", "meyer"])
    def test_domination_on_grid(self, family):
        b = make_basis(family)
        x = np.linspace(-40, 40, 2001)
        assert np.all(np.abs(b.m_wavelet(x)) <= b.envelope_m.big_phi(np.abs(x)) + 1e-9)
        assert np.all(np.abs(b.f_wavelet(x)) <= b.envelope_f.big_phi(np.abs(x)) + 1e-9)


class TestLatticeSums:
    """Direct verification of the envelope lattice-sum constants."""

    @pytest.mark.parametrize("family", ["meyer", "daubechies:3"])
    def test_full_sum_dominated(self, family):
        b = make_basis(family)
        cd = envelope_constant(b.envelope_m)
        x = np.linspace(-5.0, 5.0, 200)
        k = np.arange(-200, 201)
        sums = np.abs(b.m_wavelet(x[:, None] - k[None, :])).sum(axis=1)
        assert np.all(sums <= cd + 1e-6)

    @pytest.mark.parametrize("family", ["meyer", "daubechies:3"])
    @pytest.mark.parametrize("k1", [7, 10])
    def test_tail_sum_dominated(self, family, k1):
        b = make_basis(family)
        T = 5.0
        cdk = tail_constant(b.envelope_m, T, k1)
        x = np.linspace(-T, T, 200)
        k = np.arange(-200, 201)
        k = k[np.abs(k) >= k1]
        sums = np.abs(b.m_wavelet(x[:, None] - k[None, :])).sum(axis=1)
        assert np.all(sums <= cdk + 1e-6)


class TestOrthonormality:
    def test_db3_gram_small_window(self, db3):
        h = 2.0**-14
        t = np.arange(-5.0, 10.0 + h, h)
        funcs = [eval_dilated(db3, "f", 0, k, t) for k in range(-4, 5)]
        for j in range(3):
            funcs += [eval_dilated(db3, "m", j, k, t) for k in range(-4, 5)]
        B = np.array(funcs)
        G = (B * h) @ B.T
        assert np.max(np.abs(G - np.eye(len(G)))) < 1e-4

    def test_meyer_gram(self, meyer):
        h = 2.0**-8
        t = np.arange(-40.0, 41.0 + h, h)
        funcs = [eval_dilated(meyer, "f", 0, k, t) for k in range(-4, 5)]
        for j in range(3):
            funcs += [eval_dilated(meyer, "m", j, k, t) for k in range(-4, 5)]
        B = np.array(funcs)
        G = (B * h) @ B.T
        assert np.max(np.abs(G - np.eye(len(G)))) < 1e-4

    @pytest.mark.parametrize("family", ["haar", "daubechies:2", "meyer"])
    def test_partition_identity(self, family):
        b = make_basis(family)
        k = np.arange(-300, 301)
        for y in (-3.0, -1.2, 0.0, 0.7, 2.9):
            s = np.sum(np.abs(b.f_hat(y + 2.0 * math.pi * k)) ** 2)
            assert s == pytest.approx(1.0, abs=1e-3)


class TestFourierConsistency:
    @pytest.mark.parametrize("family", ["haar", "daubechies:2", "meyer"])
    def test_m_hat_matches_sampled_transform(self, family):
        b = make_basis(family)
        h = 2.0**-10
        t = np.arange(-56.0, 57.0, h)
        psi = b.m_wavelet(t)
        for z in (0.5, 1.0, 2.0):
            ft = np.sum(psi * np.exp(-1j * z * t)) * h
            assert abs(ft - complex(np.atleast_1d(b.m_hat(z))[0])) < 1e-3

    def test_m_hat_vanishes_at_zero(self, db2, db3, meyer):
        for b in (db2, db3, meyer):
            assert abs(complex(np.atleast_1d(b.m_hat(0.0))[0])) < 1e-8


class TestLipschitzFit:
    def test_haar_order_one_quarter_constant(self, haar):
        order, c = lipschitz_fit(haar, [0.25, 0.5, 0.75, 1.0])
        assert order == 1.0
        assert c == pytest.approx(0.25, abs=1e-3)

    def test_haar_rejects_orders_above_one(self, haar):
        # |psi_hat| ~ |z|/4 near 0, so order 1.5 cannot stabilize
        with pytest.raises(NumericError):
            lipschitz_fit(haar, [1.5])

    def test_meyer_order_one_finite_constant(self, meyer):
        order, c = lipschitz_fit(meyer, [0.25, 0.5, 0.75, 1.0])
        assert order == 1.0
        # transform vanishes near 0; constant realized on the support band
        assert 0.1 < c < 1.0

    def test_empty_candidate_set(self, meyer):
        with pytest.raises(ValidationError):
            lipschitz_fit(meyer, [])
