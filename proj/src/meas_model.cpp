#include "weakmeter/meas_model.hpp"

#include <cmath>
#include <numbers>

namespace weakmeter {

void MeasurementSetting::validate() const {
    if (!(v_hv >= 0.0 && v_hv <= 1.0))
        throw DomainError("v_hv must lie in [0, 1]");
    if (!(v_pm >= 0.0 && v_pm <= 1.0))
        throw DomainError("v_pm must lie in [0, 1]");
}

std::pair<Operator2, Operator2> arm_operators(Angle theta) {
    // One arm rotates the H component with a plate at +theta, the other the V
    // component with a plate at -theta. Each operator keeps one column of the
    // corresponding Jones matrix; the overall sign of the V column is a
    // global arm phase and is dropped.
    const double c = std::cos(2.0 * theta.rad());
    const double s = std::sin(2.0 * theta.rad());
    const Operator2 a{c, 0.0, s, 0.0};
    const Operator2 b{0.0, s, 0.0, c};
    return {a, b};
}

std::pair<Operator2, Operator2> kraus_operators(Angle theta) {
    // The minus port picks up an h/v phase flip from the extra reflection; a
    // compensating plate in that output undoes it, which symmetrizes the
    // second operator.
    const auto [a, b] = arm_operators(theta);
    const double r = 1.0 / std::numbers::sqrt2;
    return {r * (a + b), r * (stokes_hv_op() * (a - b))};
}

std::pair<Operator2, Operator2> povm_elements(Angle theta) {
    const double eps = epsilon_ideal(theta);
    const Operator2 half_id = 0.5 * Operator2::identity();
    const Operator2 half_eps = (0.5 * eps) * stokes_pm_op();
    return {half_id + half_eps, half_id - half_eps};
}

double epsilon_ideal(Angle theta) { return std::sin(4.0 * theta.rad()); }

double eta_ideal(Angle theta) {
    const double s = std::sin(2.0 * theta.rad());
    return s * s;
}

BranchPair branch_states(const DensityMatrix& rho, const MeasurementSetting& s) {
    s.validate();
    rho.require_valid(true);

    // Reduced diagonal-basis visibility acts as a phase flip in the P/M basis
    // with probability (1 - v_pm)/2, applied before the photon meets the
    // interferometer.
    const double p_flip = 0.5 * (1.0 - s.v_pm);
    const Operator2 sx = stokes_pm_op();
    const Operator2 r = (1.0 - p_flip) * rho.m + p_flip * (sx * rho.m * sx);

    const auto [a, b] = arm_operators(s.theta);
    const Operator2 direct = a * r * a.adjoint() + b * r * b.adjoint();
    const Operator2 cross = a * r * b.adjoint() + b * r * a.adjoint();
    const Operator2 damped = s.v_hv * cross;
    const Operator2 minus = 0.5 * (direct - damped);
    // the compensating plate in the minus port acts on its branch state too
    const Operator2 flip = stokes_hv_op();
    return {DensityMatrix{0.5 * (direct + damped)},
            DensityMatrix{flip * minus * flip}};
}

std::pair<double, double> output_probabilities(const DensityMatrix& rho,
                                               const MeasurementSetting& s) {
    const BranchPair bp = branch_states(rho, s);
    return {bp.b1.trace_real(), bp.b2.trace_real()};
}

std::pair<double, double> conditional_probabilities(const DensityMatrix& rho,
                                                    const MeasurementSetting& s,
                                                    const PureState& m_f,
                                                    double threshold) {
    const BranchPair bp = branch_states(rho, s);
    const double w1 = projection_prob(m_f, bp.b1);
    const double w2 = projection_prob(m_f, bp.b2);
    const double total = w1 + w2;
    if (total <= threshold)
        throw DegeneratePostSelection("post-selection pass probability vanishes");
    return {w1 / total, w2 / total};
}

double experimental_value_from_probs(double p_b1, double p_b2, double epsilon) {
    if (std::abs(epsilon) <= 1e-12)
        throw ZeroResolution("epsilon is zero; the conditional value is undefined");
    if (std::abs(p_b1 + p_b2 - 1.0) > 1e-9)
        throw DomainError("branch probabilities must sum to 1");
    return (p_b1 - p_b2) / epsilon;
}

double delta_flip(const PureState& psi_i, const PureState& m_f) {
    return std::norm(sandwich(m_f, stokes_pm_op(), psi_i)) -
           std::norm(inner(m_f, psi_i));
}

double predicted_exp_value_eta(const PureState& psi_i, const PureState& m_f,
                               double eta) {
    if (!std::isfinite(eta) || eta < 0.0)
        throw DomainError("eta must be finite and non-negative");
    const cplx overlap = inner(m_f, psi_i);
    const double num =
        (sandwich(m_f, stokes_pm_op(), psi_i) * std::conj(overlap)).real();
    const double den = std::norm(overlap) + eta * delta_flip(psi_i, m_f);
    if (den <= 1e-15)
        throw DegeneratePostSelection("post-selected fraction vanishes");
    return num / den;
}

double predicted_exp_value(const PureState& psi_i, const PureState& m_f,
                           Angle theta) {
    return predicted_exp_value_eta(psi_i, m_f, eta_ideal(theta));
}

double predicted_exp_value_phi(Angle phi, double eta) {
    if (!std::isfinite(eta) || eta < 0.0)
        throw DomainError("eta must be finite and non-negative");
    const double p = phi.rad();
    const double sp = std::sin(p);
    const double den = sp * sp + eta * std::cos(2.0 * p);
    if (den <= 1e-15)
        throw DegeneratePostSelection("post-selected fraction vanishes");
    return sp * std::cos(p) / den;
}

Enhancement max_enhancement(double eta) {
    if (!std::isfinite(eta) || !(eta > 0.0) || eta > 0.25)
        throw DomainError("the small-eta maximum needs eta in (0, 1/4]");
    return {1.0 / (2.0 * std::sqrt(eta)), Angle::radians(std::sqrt(eta))};
}

Enhancement max_enhancement_numeric(double eta) {
    if (!std::isfinite(eta) || !(eta > 0.0) || eta >= 1.0)
        throw DomainError("eta must lie in (0, 1)");
    const auto f = [eta](double phi_rad) {
        return predicted_exp_value_phi(Angle::radians(phi_rad), eta);
    };
    // Golden-section search; the objective is unimodal on (0, 45 deg].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 1e-9;
    double b = std::numbers::pi / 4.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-10) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    const double best = 0.5 * (a + b);
    return {f(best), Angle::radians(best)};
}

double resolution_from_stats(double p_b1, double p_b2, double stokes_pm_in) {
    if (std::abs(stokes_pm_in) <= 1e-9)
        throw UnpolarizedInput("input carries no diagonal polarization");
    if (std::abs(p_b1 + p_b2 - 1.0) > 1e-9)
        throw DomainError("branch probabilities must sum to 1");
    return (p_b1 - p_b2) / stokes_pm_in;
}

double backaction_from_stats(double p_h, double p_v, double stokes_hv_in) {
    if (std::abs(stokes_hv_in) <= 1e-9)
        throw UnpolarizedInput("input carries no H/V polarization");
    if (std::abs(p_h + p_v - 1.0) > 1e-9)
        throw DomainError("H and V probabilities must sum to 1");
    return 1.0 - (p_h - p_v) / stokes_hv_in;
}

double uncertainty_lhs(double epsilon, double back_action) {
    const double kept = 1.0 - back_action;
    return epsilon * epsilon + kept * kept;
}

double ellipse_residual(const TradeoffPoint& pt, double v_hv, double v_pm) {
    if (!(v_hv > 0.0) || !(v_pm > 0.0))
        throw DomainError("visibilities must be positive");
    const double x = pt.epsilon_pm / v_hv;
    const double y = (1.0 - pt.back_action) / v_pm;
    return x * x + y * y - 1.0;
}

}  // namespace weakmeter
