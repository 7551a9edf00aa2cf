#include "flateta/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace flateta {

namespace {

// B_{2j}/(2j)! for the Euler-Maclaurin tail
constexpr double kBernoulliOverFactorial[] = {
    0.0,
    8.3333333333333333333e-02,   // B2/2!
    -1.3888888888888888889e-03,  // B4/4!
    3.3068783068783068783e-05,   // B6/6!
    -8.2671957671957671958e-07,  // B8/8!
    2.0876756987868098979e-08,   // B10/10!
    -5.2841901386874931848e-10,  // B12/12!
    1.3382536530684678833e-11,   // B14/14!
    -3.3896802963225828668e-13,  // B16/16!
    8.5860620562778445642e-15,   // B18/18!
    -2.1748686985580618730e-16,  // B20/20!
    5.5090028283602295152e-18,   // B22/22!
    -1.3954464685812523341e-19,  // B24/24!
    3.5347070396294674717e-21,   // B26/26!
};

double lattice_distance(cplx shift, SpinStructure spin) {
    const cplx c = shift + (spin == SpinStructure::antiperiodic ? cplx(0.5) : cplx(0.0));
    return std::abs(c - std::round(c.real()));
}

// representative with real part in (0, 1]
cplx strip_representative(cplx c) {
    return c - (std::ceil(c.real()) - 1.0);
}

// Fourier evaluation of a periodic matrix field sampled on n grid points;
// used to evaluate the deformed connection coefficient between grid nodes.
struct TrigMatrixField {
    int n = 0;
    int rank = 0;
    std::vector<cplx> coeff;  // wavenumber-major blocks, k = -n/2 .. n/2-1

    static TrigMatrixField analyze(const Form& one_form, int rank) {
        const GridManifold& m = one_form.manifold();
        TrigMatrixField f;
        f.n = m.resolution;
        f.rank = rank;
        f.coeff.assign(static_cast<size_t>(f.n) * rank * rank, cplx(0.0));
        const int block = rank * rank;
        for (int ki = 0; ki < f.n; ++ki) {
            const int k = ki - f.n / 2;
            for (int p = 0; p < f.n; ++p) {
                const cplx w = std::polar(1.0 / f.n, -k * m.theta(p));
                const auto a = one_form.at(1, p);
                for (int i = 0; i < block; ++i)
                    f.coeff[static_cast<size_t>(ki) * block + i] += w * a(i / rank, i % rank);
            }
        }
        return f;
    }

    Matrix eval(double theta) const {
        Matrix out = Matrix::Zero(rank, rank);
        const int block = rank * rank;
        for (int ki = 0; ki < n; ++ki) {
            const int k = ki - n / 2;
            // the unmatched Nyquist mode enters through its cosine part
            const cplx w = (k == -n / 2) ? cplx(std::cos(k * theta)) : std::polar(1.0, k * theta);
            for (int i = 0; i < block; ++i)
                out(i / rank, i % rank) += w * coeff[static_cast<size_t>(ki) * block + i];
        }
        return out;
    }
};

// path-ordered exponential of u' = -B(theta) u over one period, fourth-order
// Magnus integrator on Gauss-Legendre nodes
Matrix path_ordered_holonomy(const TrigMatrixField& b, int steps) {
    const double h = kTwoPi / steps;
    const double offset = std::sqrt(3.0) / 6.0;
    Matrix t = Matrix::Identity(b.rank, b.rank);
    for (int i = 0; i < steps; ++i) {
        const double t0 = i * h;
        const Matrix m1 = -b.eval(t0 + (0.5 - offset) * h);
        const Matrix m2 = -b.eval(t0 + (0.5 + offset) * h);
        const Matrix omega =
            (h / 2.0) * (m1 + m2) + (std::sqrt(3.0) * h * h / 12.0) * (m2 * m1 - m1 * m2);
        t = expm(omega) * t;
    }
    return t;
}

std::vector<cplx> eigenvalues_of(const Matrix& m) {
    if (m.rows() == 1) return {m(0, 0)};
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("circle_spectrum: eigenvalue iteration failed");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    return out;
}

}  // namespace

ModC ModC::from(cplx z) {
    double re = z.real() - std::floor(z.real());
    if (re >= 1.0) re -= 1.0;  // guards the floor rounding edge
    return ModC{cplx(re, z.imag())};
}

double modc_distance(const ModC& a, const ModC& b) {
    const double dre = std::fabs(std::remainder(a.rep.real() - b.rep.real(), 1.0));
    const double dim = std::fabs(a.rep.imag() - b.rep.imag());
    return std::max(dre, dim);
}

bool modc_approx_eq(const ModC& a, const ModC& b, double tol) {
    return modc_distance(a, b) <= tol;
}

SpectrumFamily make_spectrum_family(std::vector<SpectrumShift> shifts, SpinStructure spin) {
    SpectrumFamily f;
    f.spin = spin;
    f.kernel_dim = 0;
    for (const auto& s : shifts) {
        if (s.multiplicity <= 0)
            throw std::invalid_argument("make_spectrum_family: nonpositive multiplicity");
        const double d = lattice_distance(s.value, spin);
        if (d > kKernelTol && d < kKernelGuard)
            throw std::runtime_error(
                "make_spectrum_family: shift at lattice distance " + std::to_string(d) +
                " is inside the kernel guard band; refine the input before classifying");
        if (d <= kKernelTol) f.kernel_dim += s.multiplicity;
    }
    f.shifts = std::move(shifts);
    return f;
}

SpectrumFamily circle_spectrum(const Matrix& w, const BundleMetric& g, int e_rank, cplx r,
                               SpinStructure spin, bool gauge_reduce) {
    if (g.mani.dim != 1)
        throw std::invalid_argument("circle_spectrum: expects an S^1 grid");
    if (w.rows() != w.cols() || w.rows() != g.rank)
        throw std::invalid_argument("circle_spectrum: W and g rank mismatch");
    if (e_rank < 1) throw std::invalid_argument("circle_spectrum: E rank must be positive");

    std::vector<cplx> raw;
    if (g.is_constant()) {
        const Matrix gm = g.at(0);
        const Matrix omega = -gm.inverse() * w.adjoint() * gm - w;
        const Matrix deformed = w + (cplx(0.5) + cplx(0.0, 0.5) * r) * omega;
        raw = eigenvalues_of(cplx(0.0, -1.0) * deformed);
    } else {
        if (!gauge_reduce)
            throw std::invalid_argument(
                "circle_spectrum: non-constant metric without gauge reduction enabled");
        const Connection conn = make_flat_connection(g.mani, {w});
        const Form omega = omega_form(conn, g);
        const Connection conn_r = deform(unitarize(conn, g), omega, r);
        const auto field = TrigMatrixField::analyze(conn_r.coeff, g.rank);
        const Matrix hol = path_ordered_holonomy(field, 4096);
        for (const cplx mu : eigenvalues_of(hol))
            raw.push_back(cplx(0.0, 1.0) * std::log(mu) / kTwoPi);
    }

    // coalesce exact repeats, then fold in the multiplicity of E
    std::vector<SpectrumShift> shifts;
    for (const cplx c : raw) {
        bool merged = false;
        for (auto& s : shifts) {
            if (std::abs(s.value - c) <= 1e-12) {
                s.multiplicity += 1;
                merged = true;
                break;
            }
        }
        if (!merged) shifts.push_back({c, 1});
    }
    for (auto& s : shifts) s.multiplicity *= e_rank;
    return make_spectrum_family(std::move(shifts), spin);
}

cplx hurwitz_zeta(cplx s, cplx a) {
    if (std::abs(s - cplx(1.0)) < 1e-12)
        throw std::domain_error("hurwitz_zeta: pole at s = 1");
    if (std::fabs(a.imag()) < 1e-14 && a.real() < 0.5 &&
        std::fabs(a.real() - std::round(a.real())) < 1e-14)
        throw std::domain_error("hurwitz_zeta: nonpositive integer a");

    // split off leading terms until Re(a) is comfortably positive
    cplx head(0.0);
    cplx base = a;
    int guard = 0;
    while (base.real() < 1.0) {
        head += std::pow(base, -s);
        base += 1.0;
        if (++guard > 100000)
            throw std::domain_error("hurwitz_zeta: argument too far left of the summation range");
    }
    const int extra = std::max(0, 18 - static_cast<int>(base.real()));
    for (int n = 0; n < extra; ++n) head += std::pow(base + cplx(n), -s);
    const cplx b = base + cplx(extra);

    cplx ans = std::pow(b, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(b, -s);
    cplx rising = s;                      // s (s+1) ... (s+2j-2)
    cplx power = std::pow(b, -s - 1.0);  // b^{-s-(2j-1)}
    for (int j = 1; j <= 13; ++j) {
        const cplx term = kBernoulliOverFactorial[j] * rising * power;
        ans += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(ans))) break;
        rising *= (s + cplx(2.0 * j - 1.0)) * (s + cplx(2.0 * j));
        power /= b * b;
    }
    return head + ans;
}

ModC reduced_eta_modZ(const SpectrumFamily& f) {
    cplx total(0.0);
    for (const auto& s : f.shifts) {
        const cplx c =
            s.value + (f.spin == SpinStructure::antiperiodic ? cplx(0.5) : cplx(0.0));
        if (lattice_distance(s.value, f.spin) <= kKernelTol) {
            // symmetric nonzero spectrum, eta vanishes; the kernel adds 1/2 each
            total += 0.5 * static_cast<double>(s.multiplicity);
            continue;
        }
        const cplx ct = strip_representative(c);
        const cplx eta0 = hurwitz_zeta(cplx(0.0), ct) - hurwitz_zeta(cplx(0.0), 1.0 - ct);
        total += 0.5 * eta0 * static_cast<double>(s.multiplicity);
    }
    return ModC::from(total);
}

ModC eta_defect(const CircleBundle& data, int e_rank, cplx r) {
    const ModC at_r = reduced_eta_modZ(
        circle_spectrum(data.w, data.g, e_rank, r, data.spin, data.gauge_reduce));
    const ModC at_0 = reduced_eta_modZ(
        circle_spectrum(data.w, data.g, e_rank, cplx(0.0), data.spin, data.gauge_reduce));
    return ModC::from(at_r.rep - at_0.rep);
}

cplx OddPolyFit::eval(cplx r) const {
    cplx sum(0.0);
    cplx power = r;
    for (const double b : coeffs) {
        sum += b * power;
        power *= r * r;
    }
    return sum;
}

OddPolyFit holo_fit(std::vector<std::pair<double, ModC>> samples, int degree_bound) {
    if (degree_bound < 1 || degree_bound % 2 == 0)
        throw std::invalid_argument("holo_fit: degree bound must be a positive odd integer");
    const int ncoef = (degree_bound + 1) / 2;
    if (static_cast<int>(samples.size()) < degree_bound + 2)
        throw std::invalid_argument("holo_fit: not enough samples");
    std::sort(samples.begin(), samples.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    int zero_idx = -1;
    for (size_t i = 0; i < samples.size(); ++i)
        if (std::fabs(samples[i].first) <= 1e-12) zero_idx = static_cast<int>(i);
    if (zero_idx < 0) throw std::invalid_argument("holo_fit: sample grid must contain r = 0");

    // lift mod-Z data to a continuous branch anchored at defect(0) = 0
    std::vector<double> lifted(samples.size(), 0.0);
    double max_imag = 0.0;
    auto lift_from = [&](int i, double anchor) {
        const double rep = samples[i].second.rep.real();
        lifted[i] = rep + std::round(anchor - rep);
        max_imag = std::max(max_imag, std::fabs(samples[i].second.rep.imag()));
    };
    lift_from(zero_idx, 0.0);
    for (int i = zero_idx + 1; i < static_cast<int>(samples.size()); ++i)
        lift_from(i, lifted[i - 1]);
    for (int i = zero_idx - 1; i >= 0; --i) lift_from(i, lifted[i + 1]);

    Eigen::MatrixXd v(samples.size(), ncoef);
    Eigen::VectorXd y(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        const double r = samples[i].first;
        double p = r;
        for (int j = 0; j < ncoef; ++j) {
            v(i, j) = p;
            p *= r * r;
        }
        y(i) = lifted[i];
    }
    const Eigen::VectorXd b = v.colPivHouseholderQr().solve(y);

    OddPolyFit fit;
    fit.coeffs.assign(b.data(), b.data() + ncoef);
    double resid = max_imag;
    const Eigen::VectorXd pred = v * b;
    for (size_t i = 0; i < samples.size(); ++i)
        resid = std::max(resid, std::fabs(pred(i) - y(i)));
    fit.max_residual = resid;
    return fit;
}

RhoResult rho_invariant(const CircleBundle& data, int e_rank) {
    const int rank_f = static_cast<int>(data.w.rows());
    RhoResult out;
    out.eta_flat = reduced_eta_modZ(circle_spectrum(data.w, data.g, e_rank, cplx(0.0, 1.0),
                                                    data.spin, data.gauge_reduce));
    out.eta_unitary = reduced_eta_modZ(
        circle_spectrum(data.w, data.g, e_rank, cplx(0.0), data.spin, data.gauge_reduce));

    const BundleMetric trivial = make_constant_metric(data.g.mani, Matrix::Identity(1, 1));
    out.eta_untwisted = reduced_eta_modZ(
        circle_spectrum(Matrix::Zero(1, 1), trivial, e_rank, cplx(0.0), data.spin, false));

    out.rho = ModC::from(out.eta_flat.rep - static_cast<double>(rank_f) * out.eta_untwisted.rep);
    out.re_decomposition =
        ModC::from(out.eta_unitary.rep - static_cast<double>(rank_f) * out.eta_untwisted.rep);
    out.im_part = out.rho.rep.imag();
    return out;
}

}  // namespace flateta
