#include "flateta/config.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace flateta {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("parse_config: " + msg); }

double parse_real(std::string_view text, const std::string& what) {
    const std::string t = trim(text);
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        fail("malformed number in " + what + ": '" + t + "'");
    }
    if (used != t.size()) fail("trailing characters in " + what + ": '" + t + "'");
    return v;
}

long parse_int(std::string_view text, const std::string& what) {
    const std::string t = trim(text);
    size_t used = 0;
    long v = 0;
    try {
        v = std::stol(t, &used);
    } catch (const std::exception&) {
        fail("malformed integer in " + what + ": '" + t + "'");
    }
    if (used != t.size()) fail("trailing characters in " + what + ": '" + t + "'");
    return v;
}

Matrix parse_matrix(std::string_view text, const std::string& key) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        fail("malformed matrix literal in '" + key + "' (expected [a, b; c, d])");
    t = t.substr(1, t.size() - 2);
    std::vector<std::vector<cplx>> rows;
    std::stringstream row_stream(t);
    std::string row;
    while (std::getline(row_stream, row, ';')) {
        std::vector<cplx> entries;
        std::stringstream entry_stream(row);
        std::string entry;
        while (std::getline(entry_stream, entry, ',')) {
            const std::string e = trim(entry);
            if (e.empty()) fail("empty matrix entry in '" + key + "'");
            try {
                entries.push_back(parse_complex(e));
            } catch (const std::exception&) {
                fail("malformed matrix literal in '" + key + "': entry '" + e + "'");
            }
        }
        if (entries.empty()) fail("empty matrix row in '" + key + "'");
        rows.push_back(std::move(entries));
    }
    if (rows.empty()) fail("empty matrix literal in '" + key + "'");
    const size_t ncol = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != ncol) fail("ragged matrix literal in '" + key + "'");
    if (rows.size() != ncol) fail("non-square matrix in '" + key + "'");
    Matrix m(rows.size(), ncol);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < ncol; ++j) m(i, j) = rows[i][j];
    return m;
}

HarmonicTerm parse_term(std::string_view text, const std::string& key) {
    std::stringstream ss{std::string(text)};
    std::string amp, fn, axis, mode;
    if (!(ss >> amp >> fn >> axis >> mode))
        fail("malformed term in '" + key + "' (expected: amplitude cos|sin axis mode)");
    std::string rest;
    if (ss >> rest) fail("trailing characters in '" + key + "'");
    HarmonicTerm t;
    t.amplitude = parse_real(amp, key);
    if (fn == "cos")
        t.use_sin = false;
    else if (fn == "sin")
        t.use_sin = true;
    else
        fail("unknown oscillator '" + fn + "' in '" + key + "' (expected cos or sin)");
    t.axis = static_cast<int>(parse_int(axis, key)) - 1;
    t.mode = static_cast<int>(parse_int(mode, key));
    if (t.axis < 0 || t.axis > 2) fail("axis out of range in '" + key + "'");
    if (t.mode < 1) fail("mode must be positive in '" + key + "'");
    return t;
}

}  // namespace

cplx parse_complex(std::string_view text) {
    std::string t;
    for (const char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.empty()) throw std::invalid_argument("parse_complex: empty literal");

    auto parse_part = [](std::string s, bool imag_unit) -> double {
        if (imag_unit) {
            if (s.empty() || s == "+") return 1.0;
            if (s == "-") return -1.0;
        }
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("parse_complex: bad literal");
        return v;
    };

    // split at the last top-level +/- that is not an exponent sign
    size_t split = std::string::npos;
    for (size_t i = t.size(); i-- > 1;) {
        if (t[i] != '+' && t[i] != '-') continue;
        const char prev = t[i - 1];
        if (prev == 'e' || prev == 'E') continue;
        split = i;
        break;
    }

    try {
        if (t.back() == 'i' || t.back() == 'I') {
            const std::string body = t.substr(0, t.size() - 1);
            if (split == std::string::npos || split == 0)
                return cplx(0.0, parse_part(body, true));
            return cplx(parse_part(body.substr(0, split), false),
                        parse_part(body.substr(split), true));
        }
        if (split != std::string::npos && split != 0) {
            // a+b with no trailing i is not a valid literal
            throw std::invalid_argument("parse_complex: bad literal");
        }
        return cplx(parse_part(t, false), 0.0);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_complex: malformed complex literal '" + t + "'");
    }
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "verify-cs", "verify-prop21", "eta-defect", "theorem-2-2", "rho", "identities"};
    return names;
}

ExperimentSpec parse_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    {
        std::stringstream ss{std::string(text)};
        std::string line;
        while (std::getline(ss, line)) {
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const size_t eq = stripped.find('=');
            if (eq == std::string::npos) fail("line without '=': '" + stripped + "'");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) fail("empty key");
            if (kv.count(key)) fail("duplicate key '" + key + "'");
            kv[key] = value;
            order.push_back(key);
        }
    }

    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    ExperimentSpec spec;
    const std::string* exp = take("experiment");
    if (!exp) fail("missing required key 'experiment'");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), *exp) == names.end())
        fail("unknown experiment name '" + *exp + "'");
    spec.experiment = *exp;

    if (const auto* v = take("dim")) spec.dim = static_cast<int>(parse_int(*v, "dim"));
    if (spec.dim != 1 && spec.dim != 3) fail("dim must be 1 or 3");
    const bool spectral_experiment = spec.experiment == "eta-defect" ||
                                     spec.experiment == "theorem-2-2" || spec.experiment == "rho";
    if (spectral_experiment && spec.dim != 1)
        fail("experiment '" + spec.experiment + "' requires dim = 1 (circle spectra only)");
    spec.resolution = spec.dim == 1 ? 64 : 16;
    if (const auto* v = take("resolution"))
        spec.resolution = static_cast<int>(parse_int(*v, "resolution"));
    if (spec.resolution < 4 || spec.resolution % 2 != 0)
        fail("resolution must be even and >= 4");
    if (const auto* v = take("rank")) spec.rank = static_cast<int>(parse_int(*v, "rank"));
    if (spec.rank < 1) fail("rank must be positive");

    spec.w.assign(spec.dim, Matrix::Zero(spec.rank, spec.rank));
    for (int axis = 0; axis < 3; ++axis) {
        const std::string key = "W" + std::to_string(axis + 1);
        const auto* v = take(key);
        if (!v) continue;
        if (axis >= spec.dim) fail("'" + key + "' given but dim = " + std::to_string(spec.dim));
        const Matrix m = parse_matrix(*v, key);
        if (m.rows() != spec.rank)
            fail("'" + key + "' is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                 " but rank = " + std::to_string(spec.rank));
        spec.w[axis] = m;
    }

    if (const auto* v = take("metric")) {
        if (*v == "identity")
            spec.metric.kind = MetricKind::identity;
        else if (*v == "constant")
            spec.metric.kind = MetricKind::constant;
        else if (*v == "harmonic")
            spec.metric.kind = MetricKind::harmonic;
        else
            fail("unknown metric kind '" + *v + "'");
    }
    if (const auto* v = take("metric_matrix")) {
        spec.metric.matrix = parse_matrix(*v, "metric_matrix");
        if (spec.metric.matrix.rows() != spec.rank)
            fail("'metric_matrix' rank mismatch (rank = " + std::to_string(spec.rank) + ")");
    }
    if (const auto* v = take("metric_rot_matrix")) {
        spec.metric.rotation = parse_matrix(*v, "metric_rot_matrix");
        spec.metric.has_rotation = true;
        if (spec.metric.rotation.rows() != spec.rank)
            fail("'metric_rot_matrix' rank mismatch");
        if ((spec.metric.rotation + spec.metric.rotation.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            fail("'metric_rot_matrix' must be anti-Hermitian");
    }
    for (int i = 1; i <= 8; ++i) {
        if (const auto* v = take("metric_term" + std::to_string(i)))
            spec.metric.terms.push_back(parse_term(*v, "metric_term" + std::to_string(i)));
        if (const auto* v = take("metric_rot_term" + std::to_string(i)))
            spec.metric.rot_terms.push_back(parse_term(*v, "metric_rot_term" + std::to_string(i)));
    }
    if (spec.metric.kind == MetricKind::constant && spec.metric.matrix.size() == 0)
        fail("metric = constant requires 'metric_matrix'");
    if (spec.metric.kind == MetricKind::harmonic) {
        if (spec.metric.matrix.size() == 0) fail("metric = harmonic requires 'metric_matrix'");
        if (spec.metric.terms.empty() && spec.metric.rot_terms.empty())
            fail("metric = harmonic requires at least one metric_term");
        for (const auto& t : spec.metric.terms)
            if (t.axis >= spec.dim) fail("metric_term axis exceeds dim");
        for (const auto& t : spec.metric.rot_terms)
            if (t.axis >= spec.dim) fail("metric_rot_term axis exceeds dim");
        if (!spec.metric.rot_terms.empty() && !spec.metric.has_rotation)
            fail("metric_rot_term given without 'metric_rot_matrix'");
    }

    if (const auto* v = take("E_rank")) spec.e_rank = static_cast<int>(parse_int(*v, "E_rank"));
    if (spec.e_rank < 1) fail("E_rank must be positive");
    if (const auto* v = take("spin")) {
        if (*v == "periodic")
            spec.spin = SpinStructure::periodic;
        else if (*v == "antiperiodic")
            spec.spin = SpinStructure::antiperiodic;
        else
            fail("unknown spin structure '" + *v + "'");
    }
    if (const auto* v = take("gauge_reduce")) {
        if (*v == "true")
            spec.gauge_reduce = true;
        else if (*v == "false")
            spec.gauge_reduce = false;
        else
            fail("'gauge_reduce' must be true or false");
    }
    if (const auto* v = take("r_grid")) {
        std::stringstream ss{*v};
        std::string entry;
        while (std::getline(ss, entry, ',')) {
            const std::string e = trim(entry);
            if (e.empty()) fail("empty entry in 'r_grid'");
            try {
                spec.r_grid.push_back(parse_complex(e));
            } catch (const std::exception&) {
                fail("malformed complex literal in 'r_grid': '" + e + "'");
            }
        }
        if (spec.r_grid.empty()) fail("'r_grid' is empty");
        for (const cplx r : spec.r_grid)
            if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
                fail("'r_grid' entries must be finite");
    }
    if (const auto* v = take("tolerance")) {
        spec.tolerance = parse_real(*v, "tolerance");
        if (spec.tolerance <= 0.0) fail("'tolerance' must be positive");
    }
    if (const auto* v = take("quadrature_steps"))
        spec.quadrature_steps = static_cast<int>(parse_int(*v, "quadrature_steps"));
    if (spec.quadrature_steps < 2) fail("'quadrature_steps' must be >= 2");
    if (const auto* v = take("jmax")) spec.jmax = static_cast<int>(parse_int(*v, "jmax"));
    if (spec.jmax < 0 || spec.jmax > 20) fail("'jmax' must be between 0 and 20");

    static const std::vector<std::string> known = {
        "experiment", "dim", "resolution", "rank", "W1", "W2", "W3",
        "metric", "metric_matrix", "metric_rot_matrix", "E_rank", "spin",
        "gauge_reduce", "r_grid", "tolerance", "quadrature_steps", "jmax"};
    for (const auto& key : order) {
        if (std::find(known.begin(), known.end(), key) != known.end()) continue;
        if (key.rfind("metric_term", 0) == 0 || key.rfind("metric_rot_term", 0) == 0) continue;
        fail("unknown key '" + key + "'");
    }
    return spec;
}

}  // namespace flateta
