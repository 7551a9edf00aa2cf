#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace flateta;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file ", p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string matrix_literal(const Matrix& m) {
    std::string out = "[";
    for (int i = 0; i < m.rows(); ++i) {
        if (i) out += "; ";
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out += ", ";
            out += format_complex(m(i, j));
        }
    }
    return out + "]";
}

// serialize a spec back to config text (test-side round-trip writer)
std::string to_config(const ExperimentSpec& s) {
    std::ostringstream out;
    out << "experiment = " << s.experiment << "\n";
    out << "dim = " << s.dim << "\n";
    out << "resolution = " << s.resolution << "\n";
    out << "rank = " << s.rank << "\n";
    for (int axis = 0; axis < s.dim; ++axis)
        out << "W" << axis + 1 << " = " << matrix_literal(s.w[axis]) << "\n";
    const char* kinds[] = {"identity", "constant", "harmonic"};
    out << "metric = " << kinds[static_cast<int>(s.metric.kind)] << "\n";
    if (s.metric.matrix.size() > 0)
        out << "metric_matrix = " << matrix_literal(s.metric.matrix) << "\n";
    if (s.metric.has_rotation)
        out << "metric_rot_matrix = " << matrix_literal(s.metric.rotation) << "\n";
    for (size_t i = 0; i < s.metric.terms.size(); ++i) {
        const auto& t = s.metric.terms[i];
        out << "metric_term" << i + 1 << " = " << t.amplitude << " "
            << (t.use_sin ? "sin" : "cos") << " " << t.axis + 1 << " " << t.mode << "\n";
    }
    for (size_t i = 0; i < s.metric.rot_terms.size(); ++i) {
        const auto& t = s.metric.rot_terms[i];
        out << "metric_rot_term" << i + 1 << " = " << t.amplitude << " "
            << (t.use_sin ? "sin" : "cos") << " " << t.axis + 1 << " " << t.mode << "\n";
    }
    out << "E_rank = " << s.e_rank << "\n";
    out << "spin = " << (s.spin == SpinStructure::periodic ? "periodic" : "antiperiodic") << "\n";
    out << "gauge_reduce = " << (s.gauge_reduce ? "true" : "false") << "\n";
    if (!s.r_grid.empty()) {
        out << "r_grid = ";
        for (size_t i = 0; i < s.r_grid.size(); ++i)
            out << (i ? ", " : "") << format_complex(s.r_grid[i]);
        out << "\n";
    }
    if (s.tolerance > 0.0) out << "tolerance = " << s.tolerance << "\n";
    out << "quadrature_steps = " << s.quadrature_steps << "\n";
    out << "jmax = " << s.jmax << "\n";
    return out.str();
}

bool specs_equal(const ExperimentSpec& a, const ExperimentSpec& b) {
    if (a.experiment != b.experiment || a.dim != b.dim || a.resolution != b.resolution ||
        a.rank != b.rank || a.e_rank != b.e_rank || a.spin != b.spin ||
        a.gauge_reduce != b.gauge_reduce || a.quadrature_steps != b.quadrature_steps ||
        a.jmax != b.jmax)
        return false;
    for (int axis = 0; axis < a.dim; ++axis)
        if ((a.w[axis] - b.w[axis]).cwiseAbs().maxCoeff() > 1e-12) return false;
    if (a.r_grid.size() != b.r_grid.size()) return false;
    for (size_t i = 0; i < a.r_grid.size(); ++i)
        if (std::abs(a.r_grid[i] - b.r_grid[i]) > 1e-12) return false;
    if (a.metric.kind != b.metric.kind) return false;
    if (a.metric.terms.size() != b.metric.terms.size()) return false;
    return std::fabs(a.tolerance - b.tolerance) <= 1e-15;
}

}  // namespace

TEST_CASE("parse_complex literal forms") {
    CHECK(parse_complex("0.3+0.25i") == cplx(0.3, 0.25));
    CHECK(parse_complex("-0.5") == cplx(-0.5, 0.0));
    CHECK(parse_complex("i") == cplx(0.0, 1.0));
    CHECK(parse_complex("-i") == cplx(0.0, -1.0));
    CHECK(parse_complex("2i") == cplx(0.0, 2.0));
    CHECK(parse_complex("1e-3-2.5i") == cplx(1e-3, -2.5));
    CHECK(parse_complex("3.5e2") == cplx(350.0, 0.0));
    CHECK(parse_complex(" 1 - i ") == cplx(1.0, -1.0));
    CHECK_THROWS_AS(parse_complex("foo"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex("1+2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_complex(""), std::invalid_argument);
}

TEST_CASE("parse_config fills defaults on a minimal circle config") {
    const ExperimentSpec s = parse_config(
        "experiment = theorem-2-2\n"
        "rank = 1\n"
        "W1 = [0.3+0.25i]\n");
    CHECK(s.dim == 1);
    CHECK(s.resolution == 64);
    CHECK(s.rank == 1);
    CHECK(s.w[0](0, 0) == cplx(0.3, 0.25));
    CHECK(s.quadrature_steps == 32);
    CHECK(s.tolerance == 0.0);  // experiment default applies at run time
    CHECK(s.metric.kind == MetricKind::identity);
    CHECK(s.e_rank == 1);
    CHECK(s.spin == SpinStructure::periodic);
}

TEST_CASE("parse_config names the offending key") {
    CHECK_THROWS_WITH_AS(parse_config("experiment = rho\nrank = 2\nW1 = [1, 0; 0]\n"),
                         doctest::Contains("W1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = rho\nrank = 2\nW1 = [0.1]\n"),
                         doctest::Contains("rank"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = rho\nW1 = [0.1]\nW1 = [0.2]\n"),
                         doctest::Contains("duplicate key 'W1'"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = rho\nbogus = 1\n"),
                         doctest::Contains("unknown key 'bogus'"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = frobnicate\n"),
                         doctest::Contains("unknown experiment"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = eta-defect\ndim = 3\n"),
                         doctest::Contains("dim = 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("experiment = rho\ndim = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("experiment = rho\nresolution = 7\n"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("experiment = rho\nmetric = constant\n"),
                         doctest::Contains("metric_matrix"), std::invalid_argument);
}

TEST_CASE("parse_config keeps the r_grid in order") {
    const ExperimentSpec s = parse_config(
        "experiment = eta-defect\n"
        "rank = 1\n"
        "W1 = [0.3+0.25i]\n"
        "r_grid = 0, 0.5, 1, i\n");
    REQUIRE(s.r_grid.size() == 4);
    CHECK(s.r_grid[0] == cplx(0.0));
    CHECK(s.r_grid[1] == cplx(0.5));
    CHECK(s.r_grid[2] == cplx(1.0));
    CHECK(s.r_grid[3] == cplx(0.0, 1.0));
}

TEST_CASE("identical configs produce identical reports modulo timing") {
    const std::string cfg =
        "experiment = eta-defect\nrank = 1\nW1 = [0.3+0.25i]\nr_grid = 0, 0.5, 1, i\n";
    Report a = run_experiment(parse_config(cfg));
    Report b = run_experiment(parse_config(cfg), 2);
    a.wall_ms = 0.0;
    b.wall_ms = 0.0;
    CHECK(emit_report(a, ReportFormat::json) == emit_report(b, ReportFormat::json));
    CHECK(a.overall_pass);
}

TEST_CASE("report formats") {
    const ExperimentSpec spec = oracles::s1_rank1_spec();
    const Report report = run_experiment(spec);
    CHECK(report.overall_pass);

    const std::string json = emit_report(report, ReportFormat::json);
    CHECK(json.find("\"schema\": 1") != std::string::npos);
    CHECK(json.find("\"overall_pass\": true") != std::string::npos);

    // the flat-connection shift 0.25 - 0.3i at r = i serializes per contract
    const std::string csv = emit_report(report, ReportFormat::csv_spectra);
    CHECK(csv.rfind("re,im,multiplicity,r\n", 0) == 0);
    CHECK(csv.find("0.25,-0.3,1,0+1i\n") != std::string::npos);

    const std::string text = emit_report(report, ReportFormat::text);
    for (const auto& check : report.checks)
        CHECK(text.find(check.name) != std::string::npos);
    CHECK(std::regex_search(text, std::regex("residual=\\d\\.\\d+e[+-]\\d+")));
    CHECK(text.find("overall: PASS") != std::string::npos);
}

TEST_CASE("failed module calls become failing checks, not crashes") {
    ExperimentSpec spec = oracles::s1_rank1_spec();
    spec.experiment = "theorem-2-2";
    spec.r_grid = {cplx(0.5), cplx(1.0), cplx(1.5), cplx(2.0)};  // no r = 0 sample
    const Report report = run_experiment(spec);
    CHECK_FALSE(report.overall_pass);
    bool found_note = false;
    for (const auto& c : report.checks) found_note = found_note || !c.note.empty();
    CHECK(found_note);
}

TEST_CASE("shipped configs parse, round-trip, and run green") {
    const std::filesystem::path dir = FLATETA_CONFIG_DIR;
    size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        ++seen;
        INFO("config: ", entry.path().string());
        const ExperimentSpec spec = parse_config(slurp(entry.path()));
        const ExperimentSpec again = parse_config(to_config(spec));
        CHECK(specs_equal(spec, again));
        if (spec.dim == 1 || spec.experiment == "identities") {
            const Report report = run_experiment(spec, 2);
            CHECK(report.overall_pass);
        }
    }
    CHECK(seen >= 6);
}
