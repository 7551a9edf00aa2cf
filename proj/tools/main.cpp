#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "flateta/experiment.hpp"

namespace {

int run_and_emit(const flateta::ExperimentSpec& spec, const std::string& format,
                 const std::string& out_path, int jobs) {
    const flateta::Report report = flateta::run_experiment(spec, jobs);
    flateta::ReportFormat fmt = flateta::ReportFormat::text;
    if (format == "json") fmt = flateta::ReportFormat::json;
    if (format == "csv-spectra") fmt = flateta::ReportFormat::csv_spectra;
    const std::string body = flateta::emit_report(report, fmt);
    if (out_path.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open output file '" << out_path << "'\n";
            return 2;
        }
        out << body;
    }
    return report.overall_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flateta: eta invariants of flat vector bundles on model tori"};
    app.require_subcommand(1);

    std::string config_path;
    std::string format = "text";
    std::string out_path;
    int jobs = 1;
    double tolerance = 0.0;
    auto* run = app.add_subcommand("run", "run a configured verification experiment");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv-spectra", "text"}));
    run->add_option("--out", out_path, "write the report to a file instead of stdout");
    run->add_option("--jobs", jobs, "worker threads for the parameter sweep")
        ->check(CLI::PositiveNumber);
    run->add_option("--tolerance", tolerance, "override the experiment tolerance")
        ->check(CLI::PositiveNumber);

    int jmax = 20;
    auto* identities =
        app.add_subcommand("identities", "exact and quadrature checks of the a_j(i) identity");
    identities->add_option("--jmax", jmax, "largest index j")->check(CLI::Range(0, 20));

    auto* self = app.add_subcommand("selftest", "run the full structural invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) {
                std::cerr << "error: cannot read config '" << config_path << "'\n";
                return 2;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            flateta::ExperimentSpec spec = flateta::parse_config(buf.str());
            if (tolerance > 0.0) spec.tolerance = tolerance;
            return run_and_emit(spec, format, out_path, jobs);
        }
        if (identities->parsed()) {
            flateta::ExperimentSpec spec;
            spec.experiment = "identities";
            spec.jmax = jmax;
            return run_and_emit(spec, "text", "", 1);
        }
        if (self->parsed()) {
            return flateta::selftest(std::cout) == 0 ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
