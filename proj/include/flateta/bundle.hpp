#pragma once

#include <functional>

#include "flateta/form.hpp"
#include "flateta/linalg.hpp"

namespace flateta {

// Connection d + A in a global frame; A is a matrix-valued 1-form.
struct Connection {
    GridManifold mani;
    int rank = 0;
    Form coeff;
    bool flat = false;
};

// Wraps a matrix 1-form; when `expect_flat` the curvature dA + A^A must
// vanish to `flat_tol`.
Connection make_connection(Form coeff, bool expect_flat = false, double flat_tol = 1e-10);

// Canonical flat family A = sum W_k dtheta_k with constant pairwise-commuting
// coefficients.
Connection make_flat_connection(const GridManifold& m, const std::vector<Matrix>& w);

// Positive Hermitian matrix field over the grid.
struct BundleMetric {
    GridManifold mani;
    int rank = 0;
    std::vector<cplx> field;  // points x rank x rank

    Matrix at(int p) const;
    bool is_constant(double tol = 1e-13) const;
    Form zero_form() const;  // the field as a degree-0 Form
};

using MetricSampler = std::function<Matrix(const std::array<double, 3>&)>;

BundleMetric make_metric(const GridManifold& m, const MetricSampler& sample,
                         double eigen_floor = 1e-8);
BundleMetric make_constant_metric(const GridManifold& m, const Matrix& g,
                                  double eigen_floor = 1e-8);

// omega(F, g) = g^{-1} dg - g^{-1} A^* g - A, the defect 1-form of the pair
Form omega_form(const Connection& conn, const BundleMetric& g);

// connection with coefficient A + omega
Connection adjoint_connection(const Connection& conn, const BundleMetric& g);

// Hermitian connection A + omega/2 on (F, g)
Connection unitarize(const Connection& conn, const BundleMetric& g);

// deformation family: coefficient A_e + (i r / 2) omega
Connection deform(const Connection& conn_e, const Form& omega, cplx r);

// dA + A^A
Form curvature(const Connection& conn);

// path-ordered exponential around one axis: exp(-2 pi W_axis) for the
// constant flat family
Matrix holonomy(const Connection& conn, int axis);

// constant coefficient matrix of one axis; throws when the coefficient varies
Matrix constant_coefficient(const Connection& conn, int axis, double tol = 1e-11);

// max over grid and axes of |dg_k - A_k^dagger g - g A_k|; zero iff the
// connection preserves g
double metric_preservation_residual(const Connection& conn, const BundleMetric& g);

}  // namespace flateta
