#include "weakmeter/meas_model.hpp"

#include <cmath>

#include "doctest.h"
#include "reference.hpp"

using namespace weakmeter;

namespace {

DensityMatrix tilted(double phi_deg) {
    return DensityMatrix::pure(input_state(Angle::degrees(phi_deg)));
}

}  // namespace

TEST_CASE("port operators at canonical plate angles") {
    // theta = 0: both ports pass the photon untouched up to the beam split
    const auto [m1_0, m2_0] = kraus_operators(Angle::degrees(0.0));
    const double r = 0.7071067811865475;
    CHECK(std::abs(m1_0.hh - cplx(r)) < 1e-14);
    CHECK(std::abs(m1_0.vv - cplx(r)) < 1e-14);
    CHECK(std::abs(m1_0.hv) < 1e-15);
    CHECK(std::abs(m2_0.hh - cplx(r)) < 1e-14);
    CHECK(std::abs(m2_0.vv - cplx(r)) < 1e-14);

    // theta = 22.5 deg: the ports project onto P and M
    const auto [m1, m2] = kraus_operators(Angle::degrees(22.5));
    const DensityMatrix p = DensityMatrix::pure(PureState::diagonal_p());
    const DensityMatrix m = DensityMatrix::pure(PureState::diagonal_m());
    CHECK(ref::max_abs_diff(ref::from(m1), ref::from(p.m)) < 1e-14);
    CHECK(ref::max_abs_diff(ref::from(m2), ref::from(m.m)) < 1e-14);
}

TEST_CASE("arm columns recombine into the reference port operators") {
    ref::Gen gen(3);
    for (int i = 0; i < 200; ++i) {
        const Angle theta = Angle::degrees(gen.range(-45.0, 45.0));
        const auto [m1, m2] = kraus_operators(theta);
        CHECK(ref::max_abs_diff(ref::from(m1), ref::kraus_b1(theta.rad())) < 1e-14);
        CHECK(ref::max_abs_diff(ref::from(m2), ref::kraus_b2(theta.rad())) < 1e-14);
    }
}

TEST_CASE("detection operators are kraus products and sum to identity") {
    ref::Gen gen(5);
    for (int i = 0; i < 1000; ++i) {
        const Angle theta = Angle::degrees(gen.range(-90.0, 90.0));
        const auto [m1, m2] = kraus_operators(theta);
        const auto [e1, e2] = povm_elements(theta);
        const ref::Mat prod1 = ref::mul(ref::dagger(ref::from(m1)), ref::from(m1));
        const ref::Mat prod2 = ref::mul(ref::dagger(ref::from(m2)), ref::from(m2));
        CHECK(ref::max_abs_diff(ref::from(e1), prod1) < 1e-12);
        CHECK(ref::max_abs_diff(ref::from(e2), prod2) < 1e-12);
        CHECK(ref::max_abs_diff(ref::from(e1 + e2), ref::identity()) < 1e-12);
    }
}

TEST_CASE("resolution and back-action scales of the lossless device") {
    const Angle half = Angle::degrees(0.5);
    CHECK(std::abs(epsilon_ideal(half) - 0.03489949670250097) < 1e-15);
    CHECK(std::abs(eta_ideal(half) - 0.00030458649045213493) < 1e-18);
    CHECK(std::abs(epsilon_ideal(Angle::degrees(22.5)) - 1.0) < 1e-15);
    CHECK(std::abs(eta_ideal(Angle::degrees(22.5)) - 0.5) < 1e-15);
    CHECK(std::abs(epsilon_ideal(Angle::degrees(0.0))) < 1e-15);
}

TEST_CASE("branch traces carry the port probabilities") {
    const MeasurementSetting strong{Angle::degrees(22.5)};
    const BranchPair bp = branch_states(DensityMatrix::pure(PureState::diagonal_p()), strong);
    CHECK(std::abs(bp.b1.trace_real() - 1.0) < 1e-14);
    CHECK(std::abs(bp.b2.trace_real()) < 1e-14);

    ref::Gen gen(13);
    for (int i = 0; i < 100; ++i) {
        const MeasurementSetting s{Angle::degrees(gen.range(-45.0, 45.0)),
                                   gen.range(0.0, 1.0), gen.range(0.0, 1.0)};
        const DensityMatrix rho = DensityMatrix::pure(gen.state());
        const BranchPair bp2 = branch_states(rho, s);
        CHECK(std::abs(bp2.b1.trace_real() + bp2.b2.trace_real() - 1.0) < 1e-12);
        CHECK_NOTHROW(bp2.b1.require_valid(false, 1e-12));
        CHECK_NOTHROW(bp2.b2.require_valid(false, 1e-12));
    }
}

TEST_CASE("ideal channel is exactly the kraus conjugation") {
    ref::Gen gen(17);
    for (int i = 0; i < 100; ++i) {
        const Angle theta = Angle::degrees(gen.range(-45.0, 45.0));
        const DensityMatrix rho = DensityMatrix::pure(gen.state());
        const BranchPair bp = branch_states(rho, MeasurementSetting{theta});
        const ref::Mat m1 = ref::kraus_b1(theta.rad());
        const ref::Mat m2 = ref::kraus_b2(theta.rad());
        const ref::Mat want1 = ref::mul(ref::mul(m1, ref::from(rho.m)), ref::dagger(m1));
        const ref::Mat want2 = ref::mul(ref::mul(m2, ref::from(rho.m)), ref::dagger(m2));
        CHECK(ref::max_abs_diff(ref::from(bp.b1.m), want1) < 1e-12);
        CHECK(ref::max_abs_diff(ref::from(bp.b2.m), want2) < 1e-12);
    }
}

TEST_CASE("path visibility damps the branch asymmetry and nothing else") {
    // diagonal eigenstate at full strength: asymmetry equals v_hv directly
    const MeasurementSetting damped{Angle::degrees(22.5), 0.71, 1.0};
    const BranchPair bp = branch_states(DensityMatrix::pure(PureState::diagonal_p()), damped);
    CHECK(std::abs(bp.b1.trace_real() - bp.b2.trace_real() - 0.71) < 1e-12);

    ref::Gen gen(19);
    for (int i = 0; i < 100; ++i) {
        const double phi_deg = gen.range(-80.0, 80.0);
        const MeasurementSetting s{Angle::degrees(gen.range(-40.0, 40.0)),
                                   gen.range(0.0, 1.0), gen.range(0.0, 1.0)};
        const DensityMatrix rho = tilted(phi_deg);
        const auto [p1, p2] = output_probabilities(rho, s);
        const double expected = s.v_hv * epsilon_ideal(s.theta) * stokes_pm(rho);
        CHECK(std::abs((p1 - p2) - expected) < 1e-12);
    }
}

TEST_CASE("diagonal dephasing sets the surviving h/v polarization") {
    ref::Gen gen(29);
    for (int i = 0; i < 100; ++i) {
        const double phi_deg = gen.range(-80.0, 80.0);
        const MeasurementSetting s{Angle::degrees(gen.range(-40.0, 40.0)),
                                   gen.range(0.0, 1.0), gen.range(0.0, 1.0)};
        const DensityMatrix rho = tilted(phi_deg);
        const BranchPair bp = branch_states(rho, s);
        const DensityMatrix out{bp.b1.m + bp.b2.m};
        const double expected =
            s.v_pm * std::cos(4.0 * s.theta.rad()) * stokes_hv(rho);
        CHECK(std::abs(stokes_hv(out) - expected) < 1e-12);
        // the surviving diagonal signal scales with the path visibility only,
        // untouched by v_pm
        CHECK(std::abs(stokes_pm(out) - s.v_hv * stokes_pm(rho)) < 1e-12);
    }
}

TEST_CASE("output and conditional probabilities") {
    // an H input splits evenly whatever the strength
    ref::Gen gen(37);
    for (int i = 0; i < 20; ++i) {
        const MeasurementSetting s{Angle::degrees(gen.range(-45.0, 45.0))};
        const auto [p1, p2] = output_probabilities(DensityMatrix::pure(PureState::horizontal()), s);
        CHECK(std::abs(p1 - 0.5) < 1e-12);
        CHECK(std::abs(p2 - 0.5) < 1e-12);
    }

    const MeasurementSetting weak{Angle::degrees(0.5)};
    const auto [q1, q2] = output_probabilities(tilted(25.0), weak);
    CHECK(std::abs((q1 - q2) - 0.026734565516599966) < 1e-14);

    // conditioning on the eigenstate pins the outcome
    const auto [c1, c2] = conditional_probabilities(
        DensityMatrix::pure(PureState::diagonal_p()), MeasurementSetting{Angle::degrees(22.5)},
        PureState::diagonal_p());
    CHECK(std::abs(c1 - 1.0) < 1e-12);
    CHECK(std::abs(c2) < 1e-12);

    CHECK_THROWS_AS(conditional_probabilities(DensityMatrix::pure(PureState::vertical()),
                                              MeasurementSetting{Angle::degrees(0.0)},
                                              PureState::horizontal()),
                    DegeneratePostSelection);
}

TEST_CASE("conditional value from a probability difference") {
    CHECK(std::abs(experimental_value_from_probs(0.6, 0.4, 0.035) - 5.714285714285714) < 1e-12);
    CHECK_THROWS_AS(experimental_value_from_probs(0.6, 0.3, 0.035), DomainError);
    CHECK_THROWS_AS(experimental_value_from_probs(0.5, 0.5, 0.0), ZeroResolution);
}

TEST_CASE("flip asymmetry of the post-selection") {
    for (int k = -8; k <= 8; ++k) {
        const double phi_deg = 5.0 * k;
        const PureState psi = input_state(Angle::degrees(phi_deg));
        const double expected = std::cos(2.0 * Angle::degrees(phi_deg).rad());
        CHECK(std::abs(delta_flip(psi, PureState::horizontal()) - expected) < 1e-12);
    }
    // eigenstates of the flip see no asymmetry
    CHECK(std::abs(delta_flip(PureState::diagonal_p(), PureState::diagonal_p())) < 1e-14);
}

TEST_CASE("finite-strength conditional mean against the operator route") {
    ref::Gen gen(43);
    for (int i = 0; i < 200; ++i) {
        const double phi_deg = gen.range(0.3, 44.0);
        const Angle theta = Angle::degrees(gen.range(0.05, 22.0));
        const PureState psi = input_state(Angle::degrees(phi_deg));
        const PureState sel = PureState::horizontal();

        // second path: squared amplitudes through the two port operators
        const ref::Mat m1 = ref::kraus_b1(theta.rad());
        const ref::Mat m2 = ref::kraus_b2(theta.rad());
        const ref::cx a1 = m1[0][0] * psi.c_h + m1[0][1] * psi.c_v;
        const ref::cx a2 = m2[0][0] * psi.c_h + m2[0][1] * psi.c_v;
        const double w1 = std::norm(a1);
        const double w2 = std::norm(a2);
        const double via_counts =
            (w1 - w2) / ((w1 + w2) * epsilon_ideal(theta));

        CHECK(std::abs(predicted_exp_value(psi, sel, theta) - via_counts) < 1e-10 * std::abs(via_counts) + 1e-12);
    }
}

TEST_CASE("finite-strength conditional mean at pinned points") {
    const PureState two = input_state(Angle::degrees(2.0));
    const PureState sel = PureState::horizontal();
    CHECK(std::abs(predicted_exp_value(two, sel, Angle::degrees(0.5)) - 22.918775250000937) < 1e-11);
    CHECK(std::abs(predicted_exp_value_eta(two, sel, 0.0003) - 22.98788785078752) < 1e-11);
    CHECK(std::abs(predicted_exp_value(input_state(Angle::degrees(4.0)), sel, Angle::degrees(0.5)) -
                   13.465963571577277) < 1e-11);

    // the phi form is the same function of a linear input post-selected on H
    ref::Gen gen(47);
    for (int i = 0; i < 100; ++i) {
        const double phi_deg = gen.range(-44.0, 44.0);
        const double eta = gen.range(1e-5, 0.3);
        const PureState psi = input_state(Angle::degrees(phi_deg));
        CHECK(std::abs(predicted_exp_value_eta(psi, sel, eta) -
                       predicted_exp_value_phi(Angle::degrees(phi_deg), eta)) < 1e-10);
    }
}

TEST_CASE("conditional mean is odd in the input angle") {
    for (int k = 1; k <= 40; ++k) {
        const double phi_deg = k * 1.1;
        const double plus = predicted_exp_value_phi(Angle::degrees(phi_deg), 0.002);
        const double minus = predicted_exp_value_phi(Angle::degrees(-phi_deg), 0.002);
        CHECK(std::abs(plus + minus) < 1e-12 * std::abs(plus) + 1e-14);
    }
}

TEST_CASE("weak limit is approached monotonically from below") {
    const double thetas[] = {10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
    for (double phi_deg : {2.0, 4.0, 10.0}) {
        const double wv = 1.0 / std::tan(Angle::degrees(phi_deg).rad());
        double prev_gap = 1e300;
        for (double th : thetas) {
            const double v = predicted_exp_value(input_state(Angle::degrees(phi_deg)),
                                                 PureState::horizontal(), Angle::degrees(th));
            const double gap = std::abs(v - wv);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
    }
}

TEST_CASE("largest conditional mean over the input angle") {
    // closed small-eta form
    const Enhancement small = max_enhancement(0.0003);
    CHECK(std::abs(small.value - 28.867513459481287) < 1e-11);
    CHECK(std::abs(small.phi.deg() - 0.9923920117592258) < 1e-9);
    CHECK_THROWS_AS(max_enhancement(0.0), DomainError);
    CHECK_THROWS_AS(max_enhancement(0.3), DomainError);

    // numerical maximum against the exact stationary point
    // 1/(2 sqrt(eta (1 - eta))) at phi = acos(1 - 2 eta)/2
    ref::Gen gen(53);
    for (int i = 0; i < 40; ++i) {
        const double eta = gen.range(2e-5, 0.4);
        const Enhancement num = max_enhancement_numeric(eta);
        const double want_v = 1.0 / (2.0 * std::sqrt(eta * (1.0 - eta)));
        const double want_phi = 0.5 * std::acos(1.0 - 2.0 * eta);
        CHECK(std::abs(num.value - want_v) < 1e-9 * want_v);
        CHECK(std::abs(num.phi.rad() - want_phi) < 1e-7);
    }

    const Enhancement at3e4 = max_enhancement_numeric(0.0003);
    CHECK(std::abs(at3e4.value - 28.871844561022424) < 1e-8);
    CHECK(std::abs(at3e4.phi.deg() - 0.9924416380596933) < 1e-6);

    // at the formula boundary the small-eta value is already 15% off
    const Enhancement edge = max_enhancement_numeric(0.25);
    CHECK(std::abs(edge.value - 1.1547005383792517) < 1e-9);
    CHECK(std::abs(edge.phi.deg() - 30.0) < 1e-5);
    CHECK(max_enhancement(0.25).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("statistics estimators recover the device parameters") {
    // exact branch statistics at full strength with damped path visibility
    const MeasurementSetting s{Angle::degrees(22.5), 0.71, 1.0};
    const DensityMatrix rho = tilted(25.0);
    const auto [p1, p2] = output_probabilities(rho, s);
    const double eps = resolution_from_stats(p1, p2, stokes_pm(rho));
    CHECK(std::abs(eps - 0.71) < 1e-12);

    CHECK_THROWS_AS(resolution_from_stats(0.5, 0.5, 0.0), UnpolarizedInput);
    CHECK_THROWS_AS(backaction_from_stats(0.5, 0.5, 1e-12), UnpolarizedInput);
    CHECK_THROWS_AS(resolution_from_stats(0.6, 0.6, 0.7), DomainError);

    // h/v statistics after dephasing at theta = 5 deg
    const MeasurementSetting d{Angle::degrees(5.0), 1.0, 0.9};
    const BranchPair bp = branch_states(rho, d);
    const double ph = (bp.b1.m.hh + bp.b2.m.hh).real();
    const double pv = (bp.b1.m.vv + bp.b2.m.vv).real();
    const double shv_out = (ph - pv) / stokes_hv(rho);
    const double ba = backaction_from_stats(ph, pv, stokes_hv(rho));
    CHECK(std::abs(ba - (1.0 - shv_out)) < 1e-12);
    CHECK(std::abs(ba - 0.15427664129268237) < 1e-12);
}

TEST_CASE("uncertainty relation saturates exactly for the lossless device") {
    ref::Gen gen(59);
    for (int i = 0; i < 200; ++i) {
        const double theta_rad = Angle::degrees(gen.range(-40.0, 40.0)).rad();
        const double eps = std::sin(4.0 * theta_rad);
        const double ba = 1.0 - std::cos(4.0 * theta_rad);
        CHECK(std::abs(uncertainty_lhs(eps, ba) - 1.0) < 1e-12);
    }

    // any visibility loss pulls the product strictly inside the bound
    const MeasurementSetting lossy{Angle::degrees(8.0), 0.8, 0.95};
    const DensityMatrix rho = tilted(25.0);
    const auto [p1, p2] = output_probabilities(rho, lossy);
    const double eps = resolution_from_stats(p1, p2, stokes_pm(rho));
    const BranchPair bp = branch_states(rho, lossy);
    const double ba = backaction_from_stats((bp.b1.m.hh + bp.b2.m.hh).real(),
                                            (bp.b1.m.vv + bp.b2.m.vv).real(),
                                            stokes_hv(rho));
    CHECK(uncertainty_lhs(eps, ba) < 1.0 - 1e-6);
}

TEST_CASE("visibility ellipse holds for every setting of the damped device") {
    ref::Gen gen(61);
    const DensityMatrix rho = tilted(25.0);
    for (int i = 0; i < 200; ++i) {
        const MeasurementSetting s{Angle::degrees(gen.range(-40.0, 40.0)),
                                   gen.range(0.05, 1.0), gen.range(0.05, 1.0)};
        const auto [p1, p2] = output_probabilities(rho, s);
        const double eps = resolution_from_stats(p1, p2, stokes_pm(rho));
        const BranchPair bp = branch_states(rho, s);
        const double ba = backaction_from_stats((bp.b1.m.hh + bp.b2.m.hh).real(),
                                                (bp.b1.m.vv + bp.b2.m.vv).real(),
                                                stokes_hv(rho));
        CHECK(std::abs(ellipse_residual({eps, ba, s.theta}, s.v_hv, s.v_pm)) < 1e-12);
    }
    CHECK(std::abs(ellipse_residual({0.5, 1.0, Angle::degrees(10.0)}, 1.0, 1.0) - (-0.75)) < 1e-12);
    CHECK_THROWS_AS(ellipse_residual({0.1, 0.1, Angle::degrees(1.0)}, 0.0, 1.0), DomainError);
}

TEST_CASE("dephasing before the splitter degrades post-selected values") {
    // identical settings except for the diagonal visibility
    const DensityMatrix rho = tilted(2.0);
    const MeasurementSetting clean{Angle::degrees(0.5), 1.0, 1.0};
    const MeasurementSetting fuzzy{Angle::degrees(0.5), 1.0, 0.9988};
    const PureState sel = PureState::horizontal();
    const double eps = epsilon_ideal(clean.theta);

    const auto [c1, c2] = conditional_probabilities(rho, clean, sel);
    const auto [f1, f2] = conditional_probabilities(rho, fuzzy, sel);
    const double v_clean = experimental_value_from_probs(c1, c2, eps);
    const double v_fuzzy = experimental_value_from_probs(f1, f2, eps);
    CHECK(v_fuzzy < v_clean);
    CHECK(v_clean > 20.0);

    // while the bare branch difference keeps its size
    const auto [p1, p2] = output_probabilities(rho, clean);
    const auto [g1, g2] = output_probabilities(rho, fuzzy);
    CHECK(std::abs((p1 - p2) - (g1 - g2)) < 1e-14);
}

TEST_CASE("setting validation") {
    const MeasurementSetting too_bright{Angle::degrees(1.0), 1.2, 1.0};
    const MeasurementSetting below_zero{Angle::degrees(1.0), 1.0, -0.1};
    const MeasurementSetting dark_paths{Angle::degrees(1.0), 0.0, 1.0};
    CHECK_THROWS_AS(too_bright.validate(), DomainError);
    CHECK_THROWS_AS(below_zero.validate(), DomainError);
    CHECK_NOTHROW(dark_paths.validate());
}
