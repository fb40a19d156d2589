#pragma once

#include <utility>

#include "weakmeter/polar_core.hpp"

namespace weakmeter {

// Variable-strength polarization measurement: a two-path interferometer whose
// arms rotate the H and V components with half-wave plates at +/- theta. The
// plate angle theta sets the strength; theta = 22.5 deg is a projective P/M
// measurement, theta -> 0 leaves the photon untouched.
struct MeasurementSetting {
    Angle theta = Angle::degrees(0.0);
    double v_hv = 1.0;  // interference visibility of the recombining paths
    double v_pm = 1.0;  // diagonal-basis visibility of the photon entering the device

    void validate() const;
};

// Conditional (unnormalized) output states of the two exit ports. Each trace
// is the probability of that port firing.
struct BranchPair {
    DensityMatrix b1;
    DensityMatrix b2;
};

// One operating point of the resolution / back-action trade-off.
struct TradeoffPoint {
    double epsilon_pm = 0.0;    // resolution of the diagonal signal
    double back_action = 0.0;   // 1 - <S_HV>_out / <S_HV>_in for an H input
    Angle theta = Angle::degrees(0.0);
};

struct Enhancement {
    double value = 0.0;
    Angle phi = Angle::degrees(0.0);
};

// The two arm operators: a keeps the rotated H column, b the rotated V
// column, so the ports see (a +/- b)/sqrt(2).
std::pair<Operator2, Operator2> arm_operators(Angle theta);

// Kraus operators of the two ports, built from the arm decomposition.
std::pair<Operator2, Operator2> kraus_operators(Angle theta);

// Detection operators E_b = M_b^dag M_b = (1 +/- epsilon S_PM)/2.
std::pair<Operator2, Operator2> povm_elements(Angle theta);

// Resolution epsilon = sin(4 theta) and back-action scale eta = sin^2(2 theta)
// of the lossless device.
double epsilon_ideal(Angle theta);
double eta_ideal(Angle theta);

// Propagate rho through the device. v_pm dephases the P/M coherence before
// the paths split; v_hv damps the path cross terms where they recombine.
BranchPair branch_states(const DensityMatrix& rho, const MeasurementSetting& s);

// Port firing probabilities (p_b1, p_b2).
std::pair<double, double> output_probabilities(const DensityMatrix& rho,
                                               const MeasurementSetting& s);

// Port probabilities conditioned on a polarizer passing m_f at the output.
// Throws DegeneratePostSelection when the total pass probability is at or
// below threshold.
std::pair<double, double> conditional_probabilities(const DensityMatrix& rho,
                                                    const MeasurementSetting& s,
                                                    const PureState& m_f,
                                                    double threshold = 1e-15);

// (p_b1 - p_b2) / epsilon for probabilities that sum to one.
double experimental_value_from_probs(double p_b1, double p_b2, double epsilon);

// |<m_f|S_PM|psi_i>|^2 - |<m_f|psi_i>|^2: how much the back-action flip
// shifts the post-selected fraction.
double delta_flip(const PureState& psi_i, const PureState& m_f);

// Conditional mean of S_PM at finite strength,
//   Re[<m|S_PM|psi><psi|m>] / (|<m|psi>|^2 + eta * delta_flip),
// written so the ratio stays finite when the bare overlap vanishes but the
// flip term keeps the denominator alive.
double predicted_exp_value(const PureState& psi_i, const PureState& m_f, Angle theta);
double predicted_exp_value_eta(const PureState& psi_i, const PureState& m_f, double eta);

// Same quantity for a linear input at phi post-selected on H:
//   sin(phi) cos(phi) / (sin^2(phi) + eta cos(2 phi)).
double predicted_exp_value_phi(Angle phi, double eta);

// Largest conditional mean over phi at fixed eta. The closed form holds for
// small eta: value 1/(2 sqrt(eta)) at phi = sqrt(eta) radians, valid up to
// eta = 1/4. The numeric variant maximizes the exact expression on
// (0, 45 deg] to 1e-10 radians and has no small-eta restriction.
Enhancement max_enhancement(double eta);
Enhancement max_enhancement_numeric(double eta);

// Estimators used on measured (or exactly computed) branch statistics.
// Probabilities are normalized within the pair of cells they came from.
double resolution_from_stats(double p_b1, double p_b2, double stokes_pm_in);
double backaction_from_stats(double p_h, double p_v, double stokes_hv_in);

// epsilon^2 + (1 - back_action)^2; bounded by 1 for any physical device.
double uncertainty_lhs(double epsilon, double back_action);

// Distance from the visibility-limited trade-off curve
//   (epsilon / v_hv)^2 + ((1 - back_action) / v_pm)^2 = 1.
double ellipse_residual(const TradeoffPoint& pt, double v_hv, double v_pm);

}  // namespace weakmeter
