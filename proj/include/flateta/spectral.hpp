#pragma once

#include <utility>
#include <vector>

#include "flateta/bundle.hpp"

namespace flateta {

// Element of C/Z: the real part of the representative is canonical in [0,1),
// the imaginary part is unconstrained.
struct ModC {
    cplx rep{0.0, 0.0};

    static ModC from(cplx z);
};

// wrap-aware distance: circle metric on the real part, absolute on the
// imaginary part
double modc_distance(const ModC& a, const ModC& b);
bool modc_approx_eq(const ModC& a, const ModC& b, double tol);

enum class SpinStructure { periodic, antiperiodic };

// Spectrum of a circle Dirac operator: eigenvalues are {n + shift} over all
// integers n (n + 1/2 for the antiperiodic spin structure).
struct SpectrumShift {
    cplx value;
    int multiplicity = 1;
};

struct SpectrumFamily {
    std::vector<SpectrumShift> shifts;
    SpinStructure spin = SpinStructure::periodic;
    int kernel_dim = 0;
};

// a shift is kernel when its distance to the relevant lattice is <= this
inline constexpr double kKernelTol = 1e-9;
// shifts with lattice distance inside (kKernelTol, kKernelGuard) are
// ambiguous and rejected with a diagnostic
inline constexpr double kKernelGuard = 1e-7;

SpectrumFamily make_spectrum_family(std::vector<SpectrumShift> shifts, SpinStructure spin);

// S^1 bundle data: flat connection W dtheta and a Hermitian metric field.
// Non-constant metrics require gauge_reduce (the spectrum is computed from
// the path-ordered holonomy of the deformed connection, which is gauge
// invariant).
struct CircleBundle {
    Matrix w;
    BundleMetric g;
    SpinStructure spin = SpinStructure::periodic;
    bool gauge_reduce = false;
};

SpectrumFamily circle_spectrum(const Matrix& w, const BundleMetric& g, int e_rank, cplx r,
                               SpinStructure spin, bool gauge_reduce = false);

// Hurwitz zeta by Euler-Maclaurin summation, meromorphic in s with the
// single pole at s = 1; a must not be a nonpositive integer.
cplx hurwitz_zeta(cplx s, cplx a);

// reduced eta invariant mod Z; complex shifts go through the holomorphic
// continuation of the real-shift formula
ModC reduced_eta_modZ(const SpectrumFamily& f);

// eta-bar at parameter r minus eta-bar at 0, in C/Z
ModC eta_defect(const CircleBundle& data, int e_rank, cplx r);

// least-squares fit of an odd polynomial sum_j b_j r^(2j+1) to unwrapped
// defect samples on a real grid through r = 0
struct OddPolyFit {
    std::vector<double> coeffs;  // b_0, b_1, ... for degrees 1, 3, ...
    double max_residual = 0.0;

    cplx eval(cplx r) const;
};

OddPolyFit holo_fit(std::vector<std::pair<double, ModC>> samples, int degree_bound);

// rho invariant with its real/imaginary decomposition data
struct RhoResult {
    ModC rho;             // eta-bar(D(i)) - rk(F) eta-bar(D^E)
    ModC eta_flat;        // eta-bar at r = i
    ModC eta_unitary;     // eta-bar at r = 0
    ModC eta_untwisted;   // eta-bar(D^E)
    ModC re_decomposition;  // eta-bar(r=0) - rk(F) eta-bar(D^E)
    double im_part = 0.0;   // Im(rho)
};

RhoResult rho_invariant(const CircleBundle& data, int e_rank);

}  // namespace flateta
