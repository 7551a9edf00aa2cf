#include <bit>
#include <cmath>
#include <ostream>
#include <random>

#include "flateta/experiment.hpp"

namespace flateta {

namespace {

struct Checker {
    std::ostream& out;
    int failures = 0;

    void bound(const std::string& name, double residual, double tol) {
        const bool ok = std::isfinite(residual) && residual <= tol;
        if (!ok) ++failures;
        char line[256];
        std::snprintf(line, sizeof(line), "%-4s %-52s residual=%.3e (tol %.1e)\n",
                      ok ? "PASS" : "FAIL", name.c_str(), residual, tol);
        out << line;
    }
    void truth(const std::string& name, bool ok) { bound(name, ok ? 0.0 : 1.0, 0.5); }
};

using Rng = std::mt19937;

cplx random_cplx(Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng)};
}

// random trigonometric polynomial field with modes up to +-3 per axis
void randomize_component(Form& f, int mask, Rng& rng) {
    const GridManifold& m = f.manifold();
    auto& c = f.component(mask);
    (void)c;
    const int nmodes = 4;
    struct Mode {
        int k[3];
        cplx amp[16];
    };
    std::vector<Mode> modes(nmodes);
    std::uniform_int_distribution<int> ki(-3, 3);
    for (auto& mode : modes) {
        for (int a = 0; a < 3; ++a) mode.k[a] = a < m.dim ? ki(rng) : 0;
        for (int e = 0; e < f.rank() * f.rank(); ++e) mode.amp[e] = random_cplx(rng, 0.5);
    }
    for (int p = 0; p < m.points(); ++p) {
        const auto coords = m.coords(p);
        auto mat = f.at(mask, p);
        for (const auto& mode : modes) {
            double phase = 0.0;
            for (int a = 0; a < m.dim; ++a) phase += mode.k[a] * m.theta(coords[a]);
            const cplx wave = std::polar(1.0, phase);
            for (int e = 0; e < f.rank() * f.rank(); ++e)
                mat(e / f.rank(), e % f.rank()) += wave * mode.amp[e];
        }
    }
}

Form random_form(const GridManifold& m, int rank, const std::vector<int>& masks, Rng& rng) {
    Form f(m, rank);
    for (const int mask : masks) randomize_component(f, mask, rng);
    return f;
}

ExperimentSpec s1_rank2_noncomm_spec() {
    ExperimentSpec s;
    s.experiment = "eta-defect";
    s.dim = 1;
    s.resolution = 64;
    s.rank = 2;
    Matrix w(2, 2);
    w << cplx(0.3, 0.25), cplx(0.15, 0.0), cplx(0.0, 0.0), cplx(-0.2, 0.45);
    s.w = {w};
    s.metric.kind = MetricKind::constant;
    Matrix g(2, 2);
    g << 1.0, 0.0, 0.0, 2.0;
    s.metric.matrix = g;
    return s;
}

// Rank-2 flat family on T^3 with noncommuting omega components. The metric
// amplitudes shrink with the resolution so that the exponential metric stays
// resolved to machine precision at the Nyquist wavenumber.
ExperimentSpec t3_rank2_spec(int resolution = 16) {
    ExperimentSpec s;
    s.experiment = "verify-prop21";
    s.dim = 3;
    s.resolution = resolution;
    s.rank = 2;
    Matrix v = Matrix::Zero(2, 2);
    v(0, 1) = 1.0;
    const Matrix id = Matrix::Identity(2, 2);
    s.w = {cplx(0.15, -0.10) * id + cplx(0.50, 0.00) * v,
           cplx(0.20, 0.05) * id + cplx(0.00, 0.40) * v,
           cplx(-0.10, 0.30) * id + cplx(0.25, 0.35) * v};
    s.metric.kind = MetricKind::harmonic;
    Matrix h(2, 2);
    h << 0.5, 0.0, 0.0, -0.5;
    s.metric.matrix = h;
    const double a1 = resolution >= 16 ? 0.4 : 0.2;
    const double a2 = resolution >= 16 ? 0.3 : 0.15;
    s.metric.terms = {{a1, false, 0, 1}, {a2, true, 2, 1}};
    return s;
}

void geometry_suite(Checker& ck, Rng& rng) {
    for (const int dim : {1, 3}) {
        const GridManifold m = make_torus_grid(dim, dim == 1 ? 64 : 16);
        const std::string tag = dim == 1 ? "[s1]" : "[t3]";

        const std::vector<int> all_masks = [&] {
            std::vector<int> masks;
            for (int mask = 0; mask < (1 << dim); ++mask) masks.push_back(mask);
            return masks;
        }();

        const Form a = random_form(m, 2, all_masks, rng);
        ck.bound("geometry/dd_zero " + tag, exterior_d(exterior_d(a)).max_abs(), 1e-10);

        // Stokes on a random degree-(dim-1) form
        std::vector<int> codim_masks;
        for (int mask = 0; mask < (1 << dim); ++mask)
            if (std::popcount(static_cast<unsigned>(mask)) == dim - 1) codim_masks.push_back(mask);
        const Form b = random_form(m, 2, codim_masks, rng);
        ck.bound("geometry/stokes " + tag, std::abs(integrate_top(exterior_d(b))), 1e-10);

        const Form x = random_form(m, 2, {0, 1}, rng);
        const Form y = random_form(m, 2, {1}, rng);
        const Form z = random_form(m, 2, {0, dim == 3 ? 2 : 1}, rng);
        ck.bound("geometry/wedge_associativity " + tag,
                 (wedge(wedge(x, y), z) - wedge(x, wedge(y, z))).max_abs(), 1e-12);

        const Form sa = random_form(m, 1, {1}, rng);
        const Form sb = random_form(m, 1, {dim == 3 ? 2 : 1}, rng);
        ck.bound("geometry/graded_commutativity " + tag,
                 (wedge(sa, sb) + wedge(sb, sa)).max_abs(), 1e-14);

        // exact odd forms have vanishing periods
        Form even(m, 1);
        randomize_component(even, 0, rng);
        if (dim == 3) randomize_component(even, 0b011, rng);
        const PairingVector periods = pair_cycles(exterior_d(even));
        double worst = 0.0;
        for (const cplx p : periods) worst = std::max(worst, std::abs(p));
        ck.bound("geometry/exact_form_periods " + tag, worst, 1e-10);
    }

    // form_exp on a pure 0-form matches the dense matrix exponential
    const GridManifold s1 = make_torus_grid(1, 8);
    Matrix x(2, 2);
    x << cplx(0.3, -0.2), cplx(0.5, 0.1), cplx(-0.4, 0.0), cplx(0.1, 0.6);
    const Form ex = form_exp(constant_form(s1, x));
    ck.bound("geometry/form_exp_zero_degree", (Matrix(ex.at(0, 0)) - expm(x)).cwiseAbs().maxCoeff(),
             1e-12);

    const GridManifold t3 = make_torus_grid(3, 8);
    const Form ahat = a_hat_form(make_curvature_input(Form(t3, 3)));
    const Form gap = ahat - identity_form(t3, 1);
    ck.truth("geometry/a_hat_of_zero_is_one", gap.max_abs() == 0.0);
}

void bundle_suite(Checker& ck) {
    const ExperimentSpec s1 = s1_rank2_noncomm_spec();
    const ExperimentSpec t3 = t3_rank2_spec(12);
    for (const ExperimentSpec* spec : {&s1, &t3}) {
        const BuiltBundle bb = build_bundle(*spec);
        const std::string tag = spec->dim == 1 ? "[s1]" : "[t3]";

        const Connection adj = adjoint_connection(bb.conn, bb.metric);
        const Connection adj2 = adjoint_connection(adj, bb.metric);
        ck.bound("bundle/adjoint_involution " + tag, (adj2.coeff - bb.conn.coeff).max_abs(), 1e-11);
        ck.bound("bundle/adjoint_flatness " + tag, curvature(adj).max_abs(), 1e-9);

        ck.bound("bundle/unitarize_preserves_metric " + tag,
                 metric_preservation_residual(bb.conn_e, bb.metric), 1e-10);
        for (const double r : {0.75, -1.5}) {
            const Connection def = deform(bb.conn_e, bb.omega, cplx(r));
            ck.bound("bundle/deform_preserves_metric_r=" + format_complex(cplx(r)) + " " + tag,
                     metric_preservation_residual(def, bb.metric), 1e-10);
        }

        const Connection endpoint = deform(bb.conn_e, bb.omega, cplx(0.0, 1.0));
        ck.bound("bundle/deform_endpoint_flat " + tag,
                 (endpoint.coeff - bb.conn.coeff).max_abs(), 1e-12);

        // g omega is pointwise Hermitian
        double worst = 0.0;
        for (int axis = 0; axis < spec->dim; ++axis) {
            const int mask = 1 << axis;
            if (!bb.omega.has_component(mask)) continue;
            for (int p = 0; p < bb.mani.points(); ++p) {
                const Matrix gw = bb.metric.at(p) * Matrix(bb.omega.at(mask, p));
                worst = std::max(worst, (gw - gw.adjoint()).cwiseAbs().maxCoeff());
            }
        }
        ck.bound("bundle/omega_g_self_adjoint " + tag, worst, 1e-11);
    }
}

void chern_suite(Checker& ck) {
    const ExperimentSpec t3spec = t3_rank2_spec();
    const BuiltBundle t3 = build_bundle(t3spec);
    const BuiltBundle s1 = build_bundle(s1_rank2_noncomm_spec());

    for (int j = 0; j <= 1; ++j) {
        const Form cj = odd_chern_form(t3.omega, j);
        ck.bound("chern/odd_form_closed_j=" + std::to_string(j), exterior_d(cj).max_abs(), 1e-9);
    }
    // the noncommuting example must have a nonvanishing degree-3 Chern form
    ck.truth("chern/c3_pointwise_nonzero", odd_chern_form(t3.omega, 1).max_abs() > 1e-3);

    // metric independence of periods
    {
        Matrix g1(2, 2);
        g1 << 1.3, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.9;
        const BundleMetric other = make_constant_metric(t3.mani, g1);
        const Form omega_other = omega_form(t3.conn, other);
        for (int j = 0; j <= 1; ++j) {
            const PairingVector pa = pair_cycles(odd_chern_form(t3.omega, j));
            const PairingVector pb = pair_cycles(odd_chern_form(omega_other, j));
            double worst = 0.0;
            for (size_t i = 0; i < pa.size(); ++i)
                worst = std::max(worst, std::abs(pa[i] - pb[i]));
            ck.bound("chern/metric_independence_j=" + std::to_string(j), worst, 1e-8);
        }
    }

    // transgression periods match the closed series, on S^1 and T^3
    for (const BuiltBundle* bb : {&s1, &t3}) {
        const std::string tag = bb->mani.dim == 1 ? "[s1]" : "[t3]";
        for (const cplx r : {cplx(0.5), cplx(-1.0), cplx(0.0, 1.0)}) {
            const Connection conn_r = deform(bb->conn_e, bb->omega, r);
            const PairingVector pa = pair_cycles(cs_transgression(bb->conn_e, conn_r, 32));
            const PairingVector pb = pair_cycles(cs_series(bb->omega, r));
            double worst = 0.0;
            for (size_t i = 0; i < pa.size(); ++i)
                worst = std::max(worst, std::abs(pa[i] - pb[i]));
            ck.bound("chern/prop21_periods_r=" + format_complex(r) + " " + tag, worst, 1e-7);
        }
    }

    // transgression differential and branch independence on T^3
    {
        const Connection conn_r = deform(t3.conn_e, t3.omega, cplx(1.0));
        const Form cs = cs_transgression(t3.conn_e, conn_r, 32);
        const Form gap =
            exterior_d(cs) - (chern_character(conn_r) - chern_character(t3.conn_e));
        ck.bound("chern/cs_differential", gap.max_abs(), 1e-8);

        const Form cs_flip = cs_transgression(t3.conn_e, conn_r, 32, SqrtBranch::flipped);
        ck.bound("chern/branch_independence", (cs - cs_flip).max_abs(), 1e-12);
        const Form ahat_flip = a_hat_form(make_curvature_input(Form(t3.mani, 3)), SqrtBranch::flipped);
        ck.bound("chern/branch_independence_ahat", (ahat_flip - t3.ahat).max_abs(), 1e-14);
    }

    // a_j closed form against Gauss-Legendre quadrature of the integral
    {
        std::vector<double> nodes, weights;
        gauss_legendre(64, 0.0, 1.0, nodes, weights);
        double worst = 0.0;
        for (int j = 0; j <= 20; ++j) {
            for (const cplx r :
                 {cplx(0.0), cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0), cplx(0.0, 2.0),
                  cplx(0.0, -2.0), cplx(0.0, 1.0)}) {
                cplx quad(0.0);
                for (int i = 0; i < 64; ++i)
                    quad += weights[i] * std::pow(1.0 + nodes[i] * nodes[i] * r * r, j);
                const cplx closed = a_coeff(j, r);
                worst = std::max(worst,
                                 std::abs(closed - quad) / std::max(1.0, std::abs(closed)));
            }
        }
        ck.bound("chern/a_coeff_vs_quadrature", worst, 1e-12);

        bool all_equal = true;
        for (int j = 0; j <= 20; ++j)
            all_equal = all_equal && (a_coeff_at_i_exact(j) == wallis_ratio_exact(j));
        ck.truth("chern/endpoint_identity_exact_j<=20", all_equal);
    }
}

void spectral_suite(Checker& ck) {
    // Hurwitz engine
    {
        double worst = 0.0;
        for (const double a : {0.25, 0.5, 0.75, 1.25})
            worst = std::max(worst, std::abs(hurwitz_zeta(cplx(0.0), cplx(a)) - (0.5 - a)));
        ck.bound("spectral/hurwitz_s0_closed_form", worst, 1e-12);

        Rng rng(7);
        std::uniform_real_distribution<double> u(0.2, 3.0);
        double rec = 0.0;
        for (int trial = 0; trial < 24; ++trial) {
            const cplx s(u(rng), u(rng) - 1.6);
            const cplx a(u(rng), 0.5 * (u(rng) - 1.6));
            const cplx gap = hurwitz_zeta(s, a) - hurwitz_zeta(s, a + 1.0) - std::pow(a, -s);
            rec = std::max(rec, std::abs(gap));
        }
        ck.bound("spectral/hurwitz_recurrence", rec, 1e-10);
        ck.bound("spectral/hurwitz_basel",
                 std::abs(hurwitz_zeta(cplx(2.0), cplx(1.0)) - kPi * kPi / 6.0), 1e-12);
    }

    const ExperimentSpec spec = s1_rank2_noncomm_spec();
    const BuiltBundle bb = build_bundle(spec);
    const CircleBundle data{spec.w[0], bb.metric, SpinStructure::periodic, false};

    // wrap-correctness: shifting by an integer leaves eta-bar unchanged
    {
        const SpectrumFamily f0 = make_spectrum_family({{cplx(0.3, -0.1), 1}, {cplx(0.6, 0.2), 2}},
                                                       SpinStructure::periodic);
        const SpectrumFamily f1 = make_spectrum_family({{cplx(1.3, -0.1), 1}, {cplx(-2.4, 0.2), 2}},
                                                       SpinStructure::periodic);
        ck.bound("spectral/wrap_correctness",
                 modc_distance(reduced_eta_modZ(f0), reduced_eta_modZ(f1)), 1e-13);
    }

    // spin-structure independence of the defect
    {
        double worst = 0.0;
        for (const cplx r : {cplx(0.5), cplx(-1.0), cplx(0.0, 1.0)}) {
            const CircleBundle anti{spec.w[0], bb.metric, SpinStructure::antiperiodic, false};
            worst = std::max(worst, modc_distance(eta_defect(data, 1, r), eta_defect(anti, 1, r)));
        }
        ck.bound("spectral/spin_independence", worst, 1e-10);
    }

    // reality of defects for real r
    {
        double worst = 0.0;
        for (const double r : {0.5, -0.5, 1.0, -2.0})
            worst = std::max(worst, std::fabs(eta_defect(data, 1, cplx(r)).rep.imag()));
        ck.bound("spectral/self_adjoint_reality", worst, 1e-11);
    }

    // swapping the connection for its adjoint negates Im(rho), keeps Re mod Z
    {
        const Connection adj = adjoint_connection(bb.conn, bb.metric);
        const Matrix w_adj = constant_coefficient(adj, 0);
        const CircleBundle adj_data{w_adj, bb.metric, SpinStructure::periodic, false};
        const RhoResult r0 = rho_invariant(data, 1);
        const RhoResult r1 = rho_invariant(adj_data, 1);
        ck.bound("spectral/conjugation_im", std::fabs(r0.im_part + r1.im_part), 1e-9);
        ck.bound("spectral/conjugation_re",
                 modc_distance(ModC::from(cplx(r0.rho.rep.real(), 0.0)),
                               ModC::from(cplx(r1.rho.rep.real(), 0.0))),
                 1e-9);
    }

    // agreement with the geometric defect
    {
        double worst = 0.0;
        for (const cplx r : {cplx(0.0), cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0), cplx(2.0),
                             cplx(-2.0), cplx(0.0, 1.0)}) {
            const ModC lhs = eta_defect(data, 1, r);
            const ModC rhs = ModC::from(defect_rhs(bb.ahat, bb.ch_e, bb.omega, r).value);
            worst = std::max(worst, modc_distance(lhs, rhs));
        }
        ck.bound("spectral/defect_agreement", worst, 1e-8);
    }

    // fitted slope reproduces the j = 0 breakdown of the geometric side
    {
        std::vector<std::pair<double, ModC>> samples;
        for (const double r : {0.0, 0.5, -0.5, 1.0, -1.0})
            samples.emplace_back(r, eta_defect(data, 1, cplx(r)));
        const OddPolyFit fit = holo_fit(samples, 1);
        const cplx c1_period = integrate_top(wedge(bb.ch_e, odd_chern_form(bb.omega, 0)));
        const double b0_expected = -c1_period.real() / kTwoPi;
        ck.bound("spectral/holo_fit_consistency", std::fabs(fit.coeffs[0] - b0_expected), 1e-8);
        ck.bound("spectral/holo_fit_residual", fit.max_residual, 1e-9);
    }

    // gauge reduction: harmonic metric defect matches the geometric side
    {
        ExperimentSpec vspec = spec;
        vspec.metric.kind = MetricKind::harmonic;
        Matrix h(2, 2);
        h << 0.4, cplx(0.2, 0.1), cplx(0.2, -0.1), -0.3;
        vspec.metric.matrix = h;
        vspec.metric.terms = {{0.3, false, 0, 1}};
        vspec.gauge_reduce = true;
        const BuiltBundle vb = build_bundle(vspec);
        const CircleBundle vdata{vspec.w[0], vb.metric, SpinStructure::periodic, true};
        double worst = 0.0;
        for (const cplx r : {cplx(1.0), cplx(0.0, 1.0)}) {
            const ModC lhs = eta_defect(vdata, 1, r);
            const ModC rhs = ModC::from(defect_rhs(vb.ahat, vb.ch_e, vb.omega, r).value);
            worst = std::max(worst, modc_distance(lhs, rhs));
        }
        ck.bound("spectral/gauge_reduction_defect", worst, 1e-8);
    }
}

}  // namespace

int selftest(std::ostream& out) {
    Checker ck{out};
    Rng rng(12345);
    geometry_suite(ck, rng);
    bundle_suite(ck);
    chern_suite(ck);
    spectral_suite(ck);
    out << (ck.failures == 0 ? "selftest: all checks passed\n"
                             : "selftest: " + std::to_string(ck.failures) + " check(s) failed\n");
    return ck.failures;
}

}  // namespace flateta
