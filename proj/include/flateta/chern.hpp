#pragma once

#include <functional>
#include <string>

#include "flateta/bundle.hpp"
#include "flateta/chern_weil.hpp"

namespace flateta {

// phi Tr[exp(-curvature)], an even scalar form
Form chern_character(const Connection& conn, SqrtBranch b = SqrtBranch::principal);

// c_{2j+1} = (2 pi i)^{-j} 2^{-(2j+1)} Tr[omega^(2j+1)]; zero when 2j+1 > dim.
// Only integer powers of 2 pi i enter, so no square-root branch is involved.
Form odd_chern_form(const Form& omega, int j);

// a_j(r) = int_0^1 (1 + u^2 r^2)^j du = sum_k C(j,k) r^(2k) / (2k+1)
cplx a_coeff(int j, cplx r);

// Polynomial coefficients of a_j(r) in powers of r^2, for j <= max_index.
struct ACoeffTable {
    int max_index = 0;
    std::vector<std::vector<double>> coeff;  // coeff[j][k] = C(j,k)/(2k+1)

    static ACoeffTable build(int max_index);
    cplx eval(int j, cplx r) const;
};

// Exact fraction arithmetic for the endpoint identity a_j(i) = 2^{2j}(j!)^2/(2j+1)!
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    static Rational of(long long n, long long d = 1);
    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    bool operator==(const Rational& o) const;
    double to_double() const;
    std::string str() const;
};

Rational a_coeff_at_i_exact(int j);   // sum_k (-1)^k C(j,k)/(2k+1), reduced
Rational wallis_ratio_exact(int j);   // prod_{m=1..j} 2m/(2m+1) = 2^{2j}(j!)^2/(2j+1)!

// Chern-Simons transgression along a user-supplied path of connections
struct ConnectionPath {
    std::function<Form(double)> coeff;      // A(t)
    std::function<Form(double)> coeff_dot;  // dA/dt
};

Form cs_transgression_path(const ConnectionPath& path, int steps,
                           SqrtBranch b = SqrtBranch::principal);

// linear path (1-t) conn0 + t conn1 with Gauss-Legendre quadrature in t
Form cs_transgression(const Connection& conn0, const Connection& conn1, int steps = 32,
                      SqrtBranch b = SqrtBranch::principal);

// closed-form series -(r/2pi) sum_j (a_j(r)/j!) c_{2j+1}, truncated at 2j+1 <= dim
Form cs_series(const Form& omega, cplx r);

// right-hand side of the eta-defect formula with per-j breakdown
struct DefectPrediction {
    cplx r;
    cplx value;
    std::vector<cplx> per_j;
};

DefectPrediction defect_rhs(const Form& ahat, const Form& ch_e, const Form& omega, cplx r);

// -(1/2pi) * integral of ahat ^ chE ^ sum_j 2^{2j} j!/(2j+1)! c_{2j+1};
// the predicted imaginary part of the reduced eta invariant at r = sqrt(-1)
double imaginary_eta_prediction(const Form& ahat, const Form& ch_e, const Form& omega);

}  // namespace flateta
