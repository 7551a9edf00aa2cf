#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flateta/chern.hpp"
#include "flateta/config.hpp"
#include "flateta/spectral.hpp"

namespace flateta {

// everything the experiments derive from an ExperimentSpec
struct BuiltBundle {
    GridManifold mani;
    Connection conn;     // the flat connection
    BundleMetric metric;
    Form omega;
    Connection conn_e;   // unitarization
    Form ahat;           // A-hat(TM), identically 1 on flat tori
    Form ch_e;           // ch(E) = E rank as a constant scalar form
};

BuiltBundle build_bundle(const ExperimentSpec& spec);

struct CheckRecord {
    std::string name;
    cplx lhs{0.0};
    cplx rhs{0.0};
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;  // diagnostic for captured errors
};

struct SpectraRow {
    double re = 0.0;
    double im = 0.0;
    int multiplicity = 1;
    cplx r{0.0};
};

struct Report {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<CheckRecord> checks;  // sorted by name
    std::vector<SpectraRow> spectra;
    bool overall_pass = false;
    double wall_ms = 0.0;
};

Report run_experiment(const ExperimentSpec& spec, int jobs = 1);

enum class ReportFormat { json, csv_spectra, text };

std::string emit_report(const Report& report, ReportFormat format);

// compact complex formatting used in reports and spectra ("0+1i")
std::string format_complex(cplx z);

// full structural invariant suite; prints one line per check, returns the
// number of failures
int selftest(std::ostream& out);

}  // namespace flateta
