#include "flateta/bundle.hpp"

#include <bit>
#include <cmath>

namespace flateta {

namespace {

void require_one_form(const Form& a, const char* who) {
    for (int mask = 0; mask < a.mask_count(); ++mask) {
        if (!a.has_component(mask)) continue;
        if (std::popcount(static_cast<unsigned>(mask)) != 1)
            throw std::invalid_argument(std::string(who) + ": coefficient must be a 1-form");
    }
}

void require_compatible(const Connection& c, const BundleMetric& g, const char* who) {
    if (!(c.mani == g.mani)) throw std::invalid_argument(std::string(who) + ": manifold mismatch");
    if (c.rank != g.rank) throw std::invalid_argument(std::string(who) + ": rank mismatch");
}

}  // namespace

Connection make_connection(Form coeff, bool expect_flat, double flat_tol) {
    require_one_form(coeff, "make_connection");
    Connection c{coeff.manifold(), coeff.rank(), std::move(coeff), expect_flat};
    if (expect_flat) {
        const double res = curvature(c).max_abs();
        if (res > flat_tol)
            throw std::invalid_argument("make_connection: curvature residual " +
                                        std::to_string(res) + " exceeds flatness tolerance");
    }
    return c;
}

Connection make_flat_connection(const GridManifold& m, const std::vector<Matrix>& w) {
    if (static_cast<int>(w.size()) != m.dim)
        throw std::invalid_argument("make_flat_connection: need one matrix per axis");
    const int rank = static_cast<int>(w[0].rows());
    for (const auto& wk : w)
        if (wk.rows() != rank || wk.cols() != rank)
            throw std::invalid_argument("make_flat_connection: non-square or mismatched coefficients");
    for (size_t i = 0; i < w.size(); ++i)
        for (size_t j = i + 1; j < w.size(); ++j)
            if ((w[i] * w[j] - w[j] * w[i]).cwiseAbs().maxCoeff() > 1e-12)
                throw std::invalid_argument("make_flat_connection: coefficients do not commute");
    Form a(m, rank);
    for (int axis = 0; axis < m.dim; ++axis) {
        const int mask = 1 << axis;
        a.component(mask);
        for (int p = 0; p < m.points(); ++p) a.at(mask, p) = w[axis];
    }
    return make_connection(std::move(a), true);
}

Matrix BundleMetric::at(int p) const {
    return Eigen::Map<const Matrix>(field.data() + static_cast<size_t>(p) * rank * rank, rank, rank);
}

bool BundleMetric::is_constant(double tol) const {
    const Matrix g0 = at(0);
    for (int p = 1; p < mani.points(); ++p)
        if ((at(p) - g0).cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

Form BundleMetric::zero_form() const {
    Form out(mani, rank);
    out.component(0) = field;
    return out;
}

BundleMetric make_metric(const GridManifold& m, const MetricSampler& sample, double eigen_floor) {
    BundleMetric g;
    g.mani = m;
    const std::array<double, 3> probe{0.0, 0.0, 0.0};
    g.rank = static_cast<int>(sample(probe).rows());
    g.field.resize(static_cast<size_t>(m.points()) * g.rank * g.rank);
    for (int p = 0; p < m.points(); ++p) {
        const auto c = m.coords(p);
        const std::array<double, 3> th{m.theta(c[0]), m.theta(c[1]), m.theta(c[2])};
        const Matrix gp = sample(th);
        if (gp.rows() != g.rank || gp.cols() != g.rank)
            throw std::invalid_argument("make_metric: inconsistent sample dimensions");
        if (!is_hermitian(gp, 1e-12))
            throw std::invalid_argument("make_metric: non-Hermitian sample");
        if (hermitian_min_eigenvalue((gp + gp.adjoint()) / 2.0) < eigen_floor)
            throw std::invalid_argument("make_metric: eigenvalue below floor (degenerate metric)");
        Eigen::Map<Matrix>(g.field.data() + static_cast<size_t>(p) * g.rank * g.rank,
                           g.rank, g.rank) = gp;
    }
    return g;
}

BundleMetric make_constant_metric(const GridManifold& m, const Matrix& g, double eigen_floor) {
    return make_metric(m, [&](const std::array<double, 3>&) { return g; }, eigen_floor);
}

Form omega_form(const Connection& conn, const BundleMetric& g) {
    require_compatible(conn, g, "omega_form");
    const GridManifold& m = conn.mani;
    const Form dg = exterior_d(g.zero_form());
    Form omega(m, conn.rank);
    std::vector<Matrix> ginv(m.points());
    for (int p = 0; p < m.points(); ++p) ginv[p] = g.at(p).inverse();
    for (int axis = 0; axis < m.dim; ++axis) {
        const int mask = 1 << axis;
        const bool has_a = conn.coeff.has_component(mask);
        const bool has_dg = dg.has_component(mask);
        if (!has_a && !has_dg) continue;
        omega.component(mask);
        for (int p = 0; p < m.points(); ++p) {
            Matrix w = Matrix::Zero(conn.rank, conn.rank);
            if (has_dg) w += ginv[p] * Matrix(dg.at(mask, p));
            if (has_a) {
                const Matrix a = conn.coeff.at(mask, p);
                w -= ginv[p] * a.adjoint() * g.at(p);
                w -= a;
            }
            omega.at(mask, p) = w;
        }
    }
    return omega;
}

Connection adjoint_connection(const Connection& conn, const BundleMetric& g) {
    Form coeff = conn.coeff + omega_form(conn, g);
    // the adjoint of a flat connection is flat
    return make_connection(std::move(coeff), conn.flat, 1e-9);
}

Connection unitarize(const Connection& conn, const BundleMetric& g) {
    Form coeff = conn.coeff + cplx(0.5) * omega_form(conn, g);
    return make_connection(std::move(coeff), false);
}

Connection deform(const Connection& conn_e, const Form& omega, cplx r) {
    if (!(conn_e.mani == omega.manifold()) || conn_e.rank != omega.rank())
        throw std::invalid_argument("deform: mismatched shapes");
    Form coeff = conn_e.coeff + (cplx(0.0, 0.5) * r) * omega;
    return make_connection(std::move(coeff), false);
}

Form curvature(const Connection& conn) {
    return exterior_d(conn.coeff) + wedge(conn.coeff, conn.coeff);
}

Matrix constant_coefficient(const Connection& conn, int axis, double tol) {
    if (axis < 0 || axis >= conn.mani.dim)
        throw std::invalid_argument("constant_coefficient: bad axis");
    const int mask = 1 << axis;
    if (!conn.coeff.has_component(mask)) return Matrix::Zero(conn.rank, conn.rank);
    const Matrix w0 = conn.coeff.at(mask, 0);
    for (int p = 1; p < conn.mani.points(); ++p)
        if ((Matrix(conn.coeff.at(mask, p)) - w0).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("constant_coefficient: coefficient varies over the grid");
    return w0;
}

Matrix holonomy(const Connection& conn, int axis) {
    if (!conn.flat) throw std::invalid_argument("holonomy: non-flat input");
    const Matrix w = constant_coefficient(conn, axis);
    return expm(-kTwoPi * w);
}

double metric_preservation_residual(const Connection& conn, const BundleMetric& g) {
    require_compatible(conn, g, "metric_preservation_residual");
    const GridManifold& m = conn.mani;
    const Form dg = exterior_d(g.zero_form());
    double worst = 0.0;
    for (int axis = 0; axis < m.dim; ++axis) {
        const int mask = 1 << axis;
        for (int p = 0; p < m.points(); ++p) {
            const Matrix a = conn.coeff.at(mask, p);
            const Matrix res = Matrix(dg.at(mask, p)) - a.adjoint() * g.at(p) - g.at(p) * a;
            worst = std::max(worst, res.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

}  // namespace flateta
