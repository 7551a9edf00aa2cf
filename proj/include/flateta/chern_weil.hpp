#pragma once

#include "flateta/form.hpp"

namespace flateta {

// Branch of sqrt(2*pi*sqrt(-1)) entering the degree normalization phi.
// Reported quantities must not depend on it; tests flip it to check.
enum class SqrtBranch { principal, flipped };

// sqrt(2*pi*i) for the chosen branch
cplx sqrt_two_pi_i(SqrtBranch b);

// phi multiplies a degree-d component by (2*pi*i)^(-d/2)
cplx phi_factor(int degree, SqrtBranch b);
Form phi_normalize(Form a, SqrtBranch b = SqrtBranch::principal);

// Antisymmetric (in frame indices) matrix of 2-forms: the curvature data of
// a metric connection on TM feeding the A-hat evaluator.
struct CurvatureInput {
    Form two_form;  // rank = frame dimension, degree-2 components only
};

CurvatureInput make_curvature_input(Form two_form, double tol = 1e-12);

// A-hat genus polynomial in the Pontryagin forms: 1 - p1/24 + (7 p1^2 - 4 p2)/5760,
// with p1 = t2/2 and p2 = t2^2/8 - t4/4 built from normalized trace powers.
// Ring needs +, -, * (graded product) and double scaling.
template <class Ring>
Ring a_hat_expansion(const Ring& one, const Ring& t2, const Ring& t4) {
    Ring p1 = 0.5 * t2;
    Ring p2 = 0.125 * (t2 * t2) - 0.25 * t4;
    Ring out = one - (1.0 / 24.0) * p1;
    out += (7.0 / 5760.0) * (p1 * p1);
    out -= (4.0 / 5760.0) * p2;
    return out;
}

// A-hat form of the curvature input; terms of degree > dim drop out
Form a_hat_form(const CurvatureInput& r, SqrtBranch b = SqrtBranch::principal);

}  // namespace flateta
