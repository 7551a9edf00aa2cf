#include "flateta/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace flateta {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double default_tolerance(const std::string& experiment) {
    if (experiment == "verify-cs") return 1e-8;
    if (experiment == "verify-prop21") return 1e-7;
    if (experiment == "eta-defect") return 1e-8;
    if (experiment == "theorem-2-2") return 1e-8;   // endpoint comparison
    if (experiment == "rho") return 1e-9;
    if (experiment == "identities") return 1e-10;
    return 1e-8;
}

std::vector<cplx> default_r_grid(const std::string& experiment) {
    if (experiment == "verify-cs") return {cplx(1.0), cplx(0.0, 1.0)};
    if (experiment == "verify-prop21")
        return {cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0), cplx(0.0, 1.0)};
    if (experiment == "eta-defect")
        return {cplx(0.0), cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0), cplx(2.0), cplx(-2.0)};
    if (experiment == "theorem-2-2")
        return {cplx(0.0), cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0)};
    return {};
}

double eval_terms(const std::vector<HarmonicTerm>& terms, const std::array<double, 3>& th) {
    double q = 0.0;
    for (const auto& t : terms) {
        const double arg = t.mode * th[t.axis];
        q += t.amplitude * (t.use_sin ? std::sin(arg) : std::cos(arg));
    }
    return q;
}

MetricSampler make_sampler(const MetricDesc& desc, int rank) {
    switch (desc.kind) {
        case MetricKind::identity:
            return [rank](const std::array<double, 3>&) { return Matrix::Identity(rank, rank); };
        case MetricKind::constant: {
            const Matrix g0 = desc.matrix;
            return [g0](const std::array<double, 3>&) { return g0; };
        }
        case MetricKind::harmonic: {
            const MetricDesc d = desc;
            return [d](const std::array<double, 3>& th) {
                Matrix g = expm(eval_terms(d.terms, th) * d.matrix);
                if (d.has_rotation && !d.rot_terms.empty()) {
                    const Matrix rot = expm(eval_terms(d.rot_terms, th) * d.rotation);
                    g = rot.adjoint() * g * rot;
                }
                return g;
            };
        }
    }
    throw std::logic_error("make_sampler: unreachable");
}

CheckRecord make_check(std::string name, cplx lhs, cplx rhs, double residual, double tol,
                       std::string note = {}) {
    CheckRecord c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.residual = residual;
    c.tolerance = tol;
    c.pass = std::isfinite(residual) && residual <= tol;
    c.note = std::move(note);
    return c;
}

CheckRecord failed_check(std::string name, const std::string& what) {
    return make_check(std::move(name), cplx(0.0), cplx(0.0),
                      std::numeric_limits<double>::infinity(), 0.0, what);
}

CheckRecord modc_check(std::string name, const ModC& lhs, const ModC& rhs, double tol) {
    return make_check(std::move(name), lhs.rep, rhs.rep, modc_distance(lhs, rhs), tol);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

double simpson_unit_interval(const std::function<double(double)>& f, int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = 1.0 / intervals;
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < intervals; ++i) sum += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

double max_period_gap(const PairingVector& a, const PairingVector& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::vector<SpectraRow> spectra_rows(const SpectrumFamily& f, cplx r) {
    std::vector<SpectraRow> rows;
    for (const auto& s : f.shifts)
        rows.push_back({s.value.real(), s.value.imag(), s.multiplicity, r});
    return rows;
}

struct WorkUnit {
    std::vector<CheckRecord> checks;
    std::vector<SpectraRow> spectra;
};

void run_verify_cs(const ExperimentSpec& spec, const BuiltBundle& bb, double tol, int jobs,
                   std::vector<WorkUnit>& units) {
    const auto& grid = spec.r_grid;
    units.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
        const cplx r = grid[i];
        const std::string tag = "_r=" + format_complex(r);
        WorkUnit& u = units[i];
        try {
            const Connection conn_r = deform(bb.conn_e, bb.omega, r);
            const Form cs = cs_transgression(bb.conn_e, conn_r, spec.quadrature_steps);
            const Form gap = exterior_d(cs) -
                             (chern_character(conn_r) - chern_character(bb.conn_e));
            u.checks.push_back(
                make_check("cs_differential" + tag, cplx(gap.max_abs()), cplx(0.0),
                           gap.max_abs(), tol));

            // an off-segment path with the same endpoints; periods must agree
            const Form a0 = bb.conn_e.coeff;
            const Form diff = conn_r.coeff - bb.conn_e.coeff;
            const Form bulge_dir = adjoint_form(diff);
            ConnectionPath bulge{
                [&](double t) {
                    return a0 + cplx(t) * diff + cplx(0.3 * t * (1.0 - t)) * bulge_dir;
                },
                [&](double t) { return diff + cplx(0.3 * (1.0 - 2.0 * t)) * bulge_dir; },
            };
            const Form cs_bulge = cs_transgression_path(bulge, spec.quadrature_steps);
            const double path_gap = max_period_gap(pair_cycles(cs), pair_cycles(cs_bulge));
            u.checks.push_back(make_check("cs_path_independence" + tag, cplx(path_gap), cplx(0.0),
                                          path_gap, 1e-7));

            if (std::fabs(r.imag()) < 1e-14) {
                double imag_worst = 0.0;
                for (const cplx p : pair_cycles(cs))
                    imag_worst = std::max(imag_worst, std::fabs(p.imag()));
                u.checks.push_back(make_check("cs_period_reality" + tag, cplx(imag_worst),
                                              cplx(0.0), imag_worst, 1e-9));
            }
        } catch (const std::exception& e) {
            u.checks.push_back(failed_check("cs_differential" + tag, e.what()));
        }
    });
}

void run_verify_prop21(const ExperimentSpec& spec, const BuiltBundle& bb, double tol, int jobs,
                       std::vector<WorkUnit>& units) {
    const auto& grid = spec.r_grid;
    // one comparison per cycle-basis slot: the circle period on S^1; the
    // three dual 2-cycle pairings plus the top integral on T^3
    const std::vector<std::string> slots =
        spec.dim == 1 ? std::vector<std::string>{"circle"}
                      : std::vector<std::string>{"dual23", "dual31", "dual12", "top"};
    units.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
        const cplx r = grid[i];
        const std::string tag = "_r=" + format_complex(r);
        WorkUnit& u = units[i];
        try {
            const Connection conn_r = deform(bb.conn_e, bb.omega, r);
            const PairingVector lhs =
                pair_cycles(cs_transgression(bb.conn_e, conn_r, spec.quadrature_steps));
            const PairingVector rhs = pair_cycles(cs_series(bb.omega, r));
            for (size_t k = 0; k < lhs.size(); ++k)
                u.checks.push_back(make_check("prop21_period_" + slots[k] + tag, lhs[k], rhs[k],
                                              std::abs(lhs[k] - rhs[k]), tol));
        } catch (const std::exception& e) {
            u.checks.push_back(failed_check("prop21_period" + tag, e.what()));
        }
    });
}

void run_eta_defect(const ExperimentSpec& spec, const BuiltBundle& bb, double tol, int jobs,
                    std::vector<WorkUnit>& units) {
    const CircleBundle data{spec.w[0], bb.metric, spec.spin, spec.gauge_reduce};
    const auto& grid = spec.r_grid;
    units.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), jobs, [&](int i) {
        const cplx r = grid[i];
        const std::string tag = "_r=" + format_complex(r);
        WorkUnit& u = units[i];
        try {
            const ModC lhs = eta_defect(data, spec.e_rank, r);
            const ModC rhs = ModC::from(defect_rhs(bb.ahat, bb.ch_e, bb.omega, r).value);
            u.checks.push_back(modc_check("defect_agreement" + tag, lhs, rhs, tol));
            if (std::fabs(r.imag()) < 1e-14)
                u.checks.push_back(make_check("defect_reality" + tag, cplx(lhs.rep.imag()),
                                              cplx(0.0), std::fabs(lhs.rep.imag()), 1e-11));
            u.spectra = spectra_rows(
                circle_spectrum(data.w, data.g, spec.e_rank, r, data.spin, data.gauge_reduce), r);
        } catch (const std::exception& e) {
            u.checks.push_back(failed_check("defect_agreement" + tag, e.what()));
        }
    });
}

void run_theorem_2_2(const ExperimentSpec& spec, const BuiltBundle& bb, double tol,
                     std::vector<WorkUnit>& units) {
    WorkUnit u;
    try {
        const CircleBundle data{spec.w[0], bb.metric, spec.spin, spec.gauge_reduce};
        std::vector<std::pair<double, ModC>> samples;
        for (const cplx r : spec.r_grid) {
            if (std::fabs(r.imag()) > 1e-14) continue;
            samples.emplace_back(r.real(), eta_defect(data, spec.e_rank, r));
        }
        const OddPolyFit fit = holo_fit(samples, spec.dim);
        u.checks.push_back(make_check("holo_fit_residual", cplx(fit.max_residual), cplx(0.0),
                                      fit.max_residual, 1e-9));

        const cplx sqrt_minus_one(0.0, 1.0);
        const ModC direct = eta_defect(data, spec.e_rank, sqrt_minus_one);
        u.checks.push_back(
            modc_check("endpoint_continuation", ModC::from(fit.eval(sqrt_minus_one)), direct, tol));

        const SpectrumFamily spec_i =
            circle_spectrum(data.w, data.g, spec.e_rank, sqrt_minus_one, data.spin, data.gauge_reduce);
        const SpectrumFamily spec_0 =
            circle_spectrum(data.w, data.g, spec.e_rank, cplx(0.0), data.spin, data.gauge_reduce);
        const ModC eta_i = reduced_eta_modZ(spec_i);
        const ModC eta_0 = reduced_eta_modZ(spec_0);
        u.checks.push_back(modc_check("re_decomposition", ModC::from(cplx(eta_i.rep.real(), 0.0)),
                                      ModC::from(cplx(eta_0.rep.real(), 0.0)), 1e-9));

        const double im_geom = imaginary_eta_prediction(bb.ahat, bb.ch_e, bb.omega);
        u.checks.push_back(make_check("im_decomposition", cplx(eta_i.rep.imag()), cplx(im_geom),
                                      std::fabs(eta_i.rep.imag() - im_geom), 1e-9));

        u.spectra = spectra_rows(spec_0, cplx(0.0));
        const auto rows_i = spectra_rows(spec_i, sqrt_minus_one);
        u.spectra.insert(u.spectra.end(), rows_i.begin(), rows_i.end());
    } catch (const std::exception& e) {
        u.checks.push_back(failed_check("theorem_2_2", e.what()));
    }
    units.push_back(std::move(u));
}

void run_rho(const ExperimentSpec& spec, const BuiltBundle& bb, double tol,
             std::vector<WorkUnit>& units) {
    WorkUnit u;
    try {
        const CircleBundle data{spec.w[0], bb.metric, spec.spin, spec.gauge_reduce};
        const RhoResult rr = rho_invariant(data, spec.e_rank);
        u.checks.push_back(modc_check("rho_re_decomposition",
                                      ModC::from(cplx(rr.rho.rep.real(), 0.0)),
                                      ModC::from(cplx(rr.re_decomposition.rep.real(), 0.0)), tol));
        const double im_geom = imaginary_eta_prediction(bb.ahat, bb.ch_e, bb.omega);
        u.checks.push_back(make_check("rho_im_geometric", cplx(rr.im_part), cplx(im_geom),
                                      std::fabs(rr.im_part - im_geom), tol));

        const Matrix& w = spec.w[0];
        const Matrix g0 = bb.metric.at(0);
        const bool diagonal_data =
            bb.metric.is_constant() &&
            (w - Matrix(w.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14 &&
            (g0 - Matrix(g0.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14;
        if (diagonal_data && spec.rank > 1) {
            cplx sum(0.0);
            for (int k = 0; k < spec.rank; ++k) {
                Matrix wk(1, 1), gk(1, 1);
                wk(0, 0) = w(k, k);
                gk(0, 0) = g0(k, k);
                const CircleBundle blk{wk, make_constant_metric(bb.mani, gk), spec.spin, false};
                sum += rho_invariant(blk, spec.e_rank).rho.rep;
            }
            u.checks.push_back(
                modc_check("rho_additivity", rr.rho, ModC::from(sum), tol));
        }
        u.spectra = spectra_rows(circle_spectrum(data.w, data.g, spec.e_rank, cplx(0.0, 1.0),
                                                 data.spin, data.gauge_reduce),
                                 cplx(0.0, 1.0));
    } catch (const std::exception& e) {
        u.checks.push_back(failed_check("rho", e.what()));
    }
    units.push_back(std::move(u));
}

void run_identities(const ExperimentSpec& spec, double tol, int jobs,
                    std::vector<WorkUnit>& units) {
    units.resize(spec.jmax + 1);
    parallel_for(spec.jmax + 1, jobs, [&](int j) {
        WorkUnit& u = units[j];
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%02d", j);
        try {
            const Rational lhs = a_coeff_at_i_exact(j);
            const Rational rhs = wallis_ratio_exact(j);
            const bool equal = lhs == rhs;
            u.checks.push_back(make_check(std::string("identity_endpoint_exact_j=") + idx,
                                          cplx(lhs.to_double()), cplx(rhs.to_double()),
                                          equal ? 0.0 : 1.0, 0.5,
                                          lhs.str() + " vs " + rhs.str()));

            const double reference = rhs.to_double();
            const cplx closed = a_coeff(j, cplx(0.0, 1.0));
            u.checks.push_back(make_check(std::string("identity_closed_form_j=") + idx, closed,
                                          cplx(reference), std::abs(closed - reference), tol));

            const double quad = simpson_unit_interval(
                [j](double x) { return std::pow(1.0 - x * x, j); }, 10000);
            u.checks.push_back(make_check(std::string("identity_quadrature_j=") + idx, cplx(quad),
                                          cplx(reference), std::fabs(quad - reference), tol));
        } catch (const std::exception& e) {
            u.checks.push_back(failed_check(std::string("identity_j=") + idx, e.what()));
        }
    });
}

}  // namespace

std::string format_complex(cplx z) {
    char buf[96];
    if (z.imag() == 0.0) {
        std::snprintf(buf, sizeof(buf), "%.12g", z.real());
    } else {
        std::snprintf(buf, sizeof(buf), "%.12g%+.12gi", z.real(), z.imag());
    }
    return buf;
}

BuiltBundle build_bundle(const ExperimentSpec& spec) {
    BuiltBundle bb;
    bb.mani = make_torus_grid(spec.dim, spec.resolution);
    bb.conn = make_flat_connection(bb.mani, spec.w);
    bb.metric = make_metric(bb.mani, make_sampler(spec.metric, spec.rank));
    bb.omega = omega_form(bb.conn, bb.metric);
    bb.conn_e = unitarize(bb.conn, bb.metric);
    bb.ahat = a_hat_form(make_curvature_input(Form(bb.mani, spec.dim)));
    bb.ch_e = constant_form(bb.mani, Matrix::Identity(1, 1) * cplx(spec.e_rank));
    return bb;
}

Report run_experiment(const ExperimentSpec& raw_spec, int jobs) {
    const auto start = std::chrono::steady_clock::now();

    ExperimentSpec spec = raw_spec;
    if (spec.r_grid.empty()) spec.r_grid = default_r_grid(spec.experiment);
    const double tol =
        spec.tolerance > 0.0 ? spec.tolerance : default_tolerance(spec.experiment);

    Report report;
    report.experiment = spec.experiment;

    std::vector<WorkUnit> units;
    try {
        if (spec.experiment == "identities") {
            run_identities(spec, tol, jobs, units);
        } else {
            const BuiltBundle bb = build_bundle(spec);
            if (spec.experiment == "verify-cs")
                run_verify_cs(spec, bb, tol, jobs, units);
            else if (spec.experiment == "verify-prop21")
                run_verify_prop21(spec, bb, tol, jobs, units);
            else if (spec.experiment == "eta-defect")
                run_eta_defect(spec, bb, tol, jobs, units);
            else if (spec.experiment == "theorem-2-2")
                run_theorem_2_2(spec, bb, tol, units);
            else if (spec.experiment == "rho")
                run_rho(spec, bb, tol, units);
            else
                throw std::invalid_argument("run_experiment: unknown experiment " + spec.experiment);
        }
    } catch (const std::exception& e) {
        units.push_back(WorkUnit{{failed_check("setup", e.what())}, {}});
    }

    for (auto& u : units) {
        report.checks.insert(report.checks.end(), u.checks.begin(), u.checks.end());
        report.spectra.insert(report.spectra.end(), u.spectra.begin(), u.spectra.end());
    }
    std::sort(report.checks.begin(), report.checks.end(),
              [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    report.overall_pass = !report.checks.empty();
    for (const auto& c : report.checks) report.overall_pass = report.overall_pass && c.pass;

    // inputs echo
    report.inputs.emplace_back("experiment", spec.experiment);
    if (spec.experiment == "identities") {
        report.inputs.emplace_back("jmax", std::to_string(spec.jmax));
    } else {
        report.inputs.emplace_back("dim", std::to_string(spec.dim));
        report.inputs.emplace_back("resolution", std::to_string(spec.resolution));
        report.inputs.emplace_back("rank", std::to_string(spec.rank));
        for (int axis = 0; axis < spec.dim && axis < static_cast<int>(spec.w.size()); ++axis) {
            std::string w;
            for (int i = 0; i < spec.rank; ++i)
                for (int j = 0; j < spec.rank; ++j) {
                    if (!w.empty()) w += ", ";
                    w += format_complex(spec.w[axis](i, j));
                }
            report.inputs.emplace_back("W" + std::to_string(axis + 1), "[" + w + "]");
        }
        const char* metric_kinds[] = {"identity", "constant", "harmonic"};
        report.inputs.emplace_back("metric", metric_kinds[static_cast<int>(spec.metric.kind)]);
        report.inputs.emplace_back("E_rank", std::to_string(spec.e_rank));
        report.inputs.emplace_back(
            "spin", spec.spin == SpinStructure::periodic ? "periodic" : "antiperiodic");
        std::string grid;
        for (const cplx r : spec.r_grid) {
            if (!grid.empty()) grid += ", ";
            grid += format_complex(r);
        }
        report.inputs.emplace_back("r_grid", grid);
        report.inputs.emplace_back("quadrature_steps", std::to_string(spec.quadrature_steps));
    }
    report.inputs.emplace_back("tolerance", fmt_double(tol));

    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string emit_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        nlohmann::json j;
        j["schema"] = 1;
        j["experiment"] = report.experiment;
        nlohmann::json inputs = nlohmann::json::object();
        for (const auto& [k, v] : report.inputs) inputs[k] = v;
        j["inputs"] = inputs;
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : report.checks) {
            nlohmann::json jc;
            jc["name"] = c.name;
            jc["lhs"] = {c.lhs.real(), c.lhs.imag()};
            jc["rhs"] = {c.rhs.real(), c.rhs.imag()};
            jc["residual"] = c.residual;
            jc["tolerance"] = c.tolerance;
            jc["pass"] = c.pass;
            if (!c.note.empty()) jc["note"] = c.note;
            checks.push_back(jc);
        }
        j["checks"] = checks;
        nlohmann::json spectra = nlohmann::json::array();
        for (const auto& s : report.spectra) {
            nlohmann::json js;
            js["re"] = s.re;
            js["im"] = s.im;
            js["multiplicity"] = s.multiplicity;
            js["r"] = format_complex(s.r);
            spectra.push_back(js);
        }
        j["spectra"] = spectra;
        j["overall_pass"] = report.overall_pass;
        j["wall_ms"] = report.wall_ms;
        return j.dump(2) + "\n";
    }
    if (format == ReportFormat::csv_spectra) {
        std::string out = "re,im,multiplicity,r\n";
        char buf[160];
        for (const auto& s : report.spectra) {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%s\n", s.re, s.im, s.multiplicity,
                          format_complex(s.r).c_str());
            out += buf;
        }
        return out;
    }
    // text
    std::ostringstream out;
    out << "experiment: " << report.experiment << "\n";
    for (const auto& c : report.checks) {
        char line[512];
        std::snprintf(line, sizeof(line), "%-4s %-40s residual=%.3e (tol %.1e)  lhs=%s rhs=%s\n",
                      c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.tolerance,
                      format_complex(c.lhs).c_str(), format_complex(c.rhs).c_str());
        out << line;
        if (!c.note.empty()) out << "     note: " << c.note << "\n";
    }
    char tail[128];
    std::snprintf(tail, sizeof(tail), "overall: %s (%zu checks, %.1f ms)\n",
                  report.overall_pass ? "PASS" : "FAIL", report.checks.size(), report.wall_ms);
    out << tail;
    return out.str();
}

}  // namespace flateta
