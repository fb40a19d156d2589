#include "weakmeter/polar_core.hpp"

#include <cmath>
#include <numbers>

namespace weakmeter {

namespace {
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
}

Angle Angle::radians(double value) {
    if (!std::isfinite(value)) throw DomainError("angle must be finite");
    return Angle(value * kDegPerRad);
}

Angle Angle::degrees(double value) {
    if (!std::isfinite(value)) throw DomainError("angle must be finite");
    return Angle(value);
}

double Angle::rad() const { return deg_ / kDegPerRad; }

PureState PureState::normalized(cplx h, cplx v) {
    const double n2 = std::norm(h) + std::norm(v);
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw InvalidState("cannot normalize a zero or non-finite state");
    const double inv = 1.0 / std::sqrt(n2);
    return {h * inv, v * inv};
}

PureState PureState::diagonal_p() {
    const double r = 1.0 / std::numbers::sqrt2;
    return {r, r};
}

PureState PureState::diagonal_m() {
    const double r = 1.0 / std::numbers::sqrt2;
    return {r, -r};
}

double PureState::norm2() const { return std::norm(c_h) + std::norm(c_v); }

PureState PureState::canonical() const {
    const cplx lead = std::abs(c_h) > 1e-15 ? c_h : c_v;
    const double mag = std::abs(lead);
    if (mag == 0.0) return *this;
    const cplx phase = std::conj(lead) / mag;
    return {c_h * phase, c_v * phase};
}

cplx inner(const PureState& bra, const PureState& ket) {
    return std::conj(bra.c_h) * ket.c_h + std::conj(bra.c_v) * ket.c_v;
}

PureState orthogonal(const PureState& s) {
    return {-std::conj(s.c_v), std::conj(s.c_h)};
}

Operator2 Operator2::identity() { return {1.0, 0.0, 0.0, 1.0}; }

Operator2 Operator2::outer(const PureState& ket, const PureState& bra) {
    return {ket.c_h * std::conj(bra.c_h), ket.c_h * std::conj(bra.c_v),
            ket.c_v * std::conj(bra.c_h), ket.c_v * std::conj(bra.c_v)};
}

Operator2 Operator2::adjoint() const {
    return {std::conj(hh), std::conj(vh), std::conj(hv), std::conj(vv)};
}

bool Operator2::is_hermitian(double tol) const {
    return std::abs(hh.imag()) <= tol && std::abs(vv.imag()) <= tol &&
           std::abs(hv - std::conj(vh)) <= tol;
}

bool Operator2::is_unitary(double tol) const {
    const Operator2 p = *this * adjoint();
    return std::abs(p.hh - 1.0) <= tol && std::abs(p.vv - 1.0) <= tol &&
           std::abs(p.hv) <= tol && std::abs(p.vh) <= tol;
}

Operator2 operator+(const Operator2& a, const Operator2& b) {
    return {a.hh + b.hh, a.hv + b.hv, a.vh + b.vh, a.vv + b.vv};
}

Operator2 operator-(const Operator2& a, const Operator2& b) {
    return {a.hh - b.hh, a.hv - b.hv, a.vh - b.vh, a.vv - b.vv};
}

Operator2 operator*(const Operator2& a, const Operator2& b) {
    return {a.hh * b.hh + a.hv * b.vh, a.hh * b.hv + a.hv * b.vv,
            a.vh * b.hh + a.vv * b.vh, a.vh * b.hv + a.vv * b.vv};
}

Operator2 operator*(cplx s, const Operator2& a) {
    return {s * a.hh, s * a.hv, s * a.vh, s * a.vv};
}

Operator2 operator*(double s, const Operator2& a) { return cplx(s, 0.0) * a; }

cplx sandwich(const PureState& bra, const Operator2& op, const PureState& ket) {
    const cplx top = op.hh * ket.c_h + op.hv * ket.c_v;
    const cplx bot = op.vh * ket.c_h + op.vv * ket.c_v;
    return std::conj(bra.c_h) * top + std::conj(bra.c_v) * bot;
}

DensityMatrix DensityMatrix::pure(const PureState& s) {
    return {Operator2::outer(s, s)};
}

DensityMatrix DensityMatrix::from_matrix(const Operator2& op, double tol) {
    DensityMatrix rho{op};
    rho.require_valid(false, tol);
    return rho;
}

double DensityMatrix::min_eigenvalue() const {
    // Real eigenvalues of a hermitian 2x2 from trace and determinant.
    const double tr = m.trace().real();
    const double det = (m.hh * m.vv - m.hv * m.vh).real();
    const double disc = tr * tr - 4.0 * det;
    return 0.5 * (tr - std::sqrt(std::max(disc, 0.0)));
}

void DensityMatrix::require_valid(bool unit_trace, double tol) const {
    const bool finite = std::isfinite(m.hh.real()) && std::isfinite(m.hh.imag()) &&
                        std::isfinite(m.hv.real()) && std::isfinite(m.hv.imag()) &&
                        std::isfinite(m.vh.real()) && std::isfinite(m.vh.imag()) &&
                        std::isfinite(m.vv.real()) && std::isfinite(m.vv.imag());
    if (!finite) throw InvalidState("density matrix has non-finite entries");
    if (!m.is_hermitian(tol)) throw InvalidState("density matrix is not hermitian");
    if (min_eigenvalue() < -tol)
        throw InvalidState("density matrix has a negative eigenvalue");
    if (unit_trace && std::abs(trace_real() - 1.0) > tol)
        throw InvalidState("density matrix must have unit trace");
}

double expectation(const DensityMatrix& rho, const Operator2& obs) {
    return (rho.m * obs).trace().real();
}

double projection_prob(const PureState& m, const DensityMatrix& rho) {
    return sandwich(m, rho.m, m).real();
}

Operator2 stokes_pm_op() { return {0.0, 1.0, 1.0, 0.0}; }

Operator2 stokes_hv_op() { return {1.0, 0.0, 0.0, -1.0}; }

double stokes_pm(const DensityMatrix& rho) { return expectation(rho, stokes_pm_op()); }

double stokes_hv(const DensityMatrix& rho) { return expectation(rho, stokes_hv_op()); }

PureState input_state(Angle phi) {
    return {std::sin(phi.rad()), std::cos(phi.rad())};
}

Operator2 hwp_jones(Angle theta) {
    const double c = std::cos(2.0 * theta.rad());
    const double s = std::sin(2.0 * theta.rad());
    return {c, s, s, -c};
}

double weak_value(const PureState& psi_i, const PureState& m_f, const Operator2& obs,
                  double threshold) {
    const cplx overlap = inner(m_f, psi_i);
    if (std::abs(overlap) <= threshold)
        throw DegeneratePostSelection("post-selection is orthogonal to the input state");
    return (sandwich(m_f, obs, psi_i) / overlap).real();
}

}  // namespace weakmeter
