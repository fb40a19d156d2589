#pragma once

#include <complex>

#include "weakmeter/errors.hpp"

namespace weakmeter {

using cplx = std::complex<double>;

// Plane angle. Degrees are the unit of record (so values coming from config
// grids survive exactly); conversion to radians happens at the trig boundary.
class Angle {
public:
    Angle() = default;

    static Angle radians(double value);
    static Angle degrees(double value);

    double rad() const;
    double deg() const { return deg_; }

private:
    explicit Angle(double deg) : deg_(deg) {}
    double deg_ = 0.0;
};

// Polarization ket with amplitudes in the H/V basis.
struct PureState {
    cplx c_h{0.0, 0.0};
    cplx c_v{0.0, 0.0};

    static PureState normalized(cplx h, cplx v);
    static PureState horizontal() { return {1.0, 0.0}; }
    static PureState vertical() { return {0.0, 1.0}; }
    static PureState diagonal_p();
    static PureState diagonal_m();

    double norm2() const;

    // Global phase fixed so the first nonvanishing amplitude is real and
    // non-negative. Display convenience; no physics depends on it.
    PureState canonical() const;
};

// <bra|ket>
cplx inner(const PureState& bra, const PureState& ket);

// State orthogonal to s, e.g. the blocked port of a polarizer set to pass s.
PureState orthogonal(const PureState& s);

// 2x2 operator on the polarization space; entry names are row then column
// in the H/V basis.
struct Operator2 {
    cplx hh{0.0, 0.0}, hv{0.0, 0.0};
    cplx vh{0.0, 0.0}, vv{0.0, 0.0};

    static Operator2 identity();
    static Operator2 outer(const PureState& ket, const PureState& bra);

    Operator2 adjoint() const;
    cplx trace() const { return hh + vv; }
    bool is_hermitian(double tol = 1e-12) const;
    bool is_unitary(double tol = 1e-12) const;
};

Operator2 operator+(const Operator2& a, const Operator2& b);
Operator2 operator-(const Operator2& a, const Operator2& b);
Operator2 operator*(const Operator2& a, const Operator2& b);
Operator2 operator*(cplx s, const Operator2& a);
Operator2 operator*(double s, const Operator2& a);

// <bra|op|ket>
cplx sandwich(const PureState& bra, const Operator2& op, const PureState& ket);

// Density operator. A plain matrix with validation on demand, because
// conditional branch states legitimately carry trace < 1.
struct DensityMatrix {
    Operator2 m;

    static DensityMatrix pure(const PureState& s);
    static DensityMatrix from_matrix(const Operator2& op, double tol = 1e-12);

    double trace_real() const { return m.trace().real(); }
    double min_eigenvalue() const;

    // Hermitian, positive semidefinite, and optionally trace one, all within
    // tol. Throws InvalidState otherwise.
    void require_valid(bool unit_trace, double tol = 1e-12) const;
};

// Tr[rho obs]; the imaginary part of the trace is rounding noise for
// hermitian obs and is dropped.
double expectation(const DensityMatrix& rho, const Operator2& obs);

// <m|rho|m>
double projection_prob(const PureState& m, const DensityMatrix& rho);

// Stokes operators for the diagonal (P/M) and computational (H/V) bases,
// and the corresponding expectation values.
Operator2 stokes_pm_op();
Operator2 stokes_hv_op();
double stokes_pm(const DensityMatrix& rho);
double stokes_hv(const DensityMatrix& rho);

// Linear polarization tilted phi away from V toward H: (sin phi, cos phi).
PureState input_state(Angle phi);

// Jones matrix of a half-wave plate with its fast axis at theta.
Operator2 hwp_jones(Angle theta);

// Re[<m_f|obs|psi_i> / <m_f|psi_i>], the conditional mean left in the
// zero-strength limit. Throws DegeneratePostSelection when the overlap
// magnitude is at or below threshold.
double weak_value(const PureState& psi_i, const PureState& m_f, const Operator2& obs,
                  double threshold = 1e-12);

}  // namespace weakmeter
