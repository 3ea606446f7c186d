#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdlab/lattice_dist.hpp"
#include "mdlab/report.hpp"

namespace mdlab::runner {

enum class Model { Combinatorial, Antivoter, BinaryCode, CurieWeiss, Independent };

const char* to_string(Model m);
Model parse_model(const std::string& s);

enum class Format { Csv, Json };

struct GridSpec {
    std::optional<double> x_max;  ///< empty means "auto"
    int points = 61;
};

struct McSpec {
    std::uint64_t seed = 0;
    std::uint64_t samples = 1;
    std::uint64_t burnin = 0;
};

struct OutputSpec {
    Format format = Format::Csv;
    std::string path;
};

struct ExperimentConfig {
    Model model = Model::Antivoter;
    nlohmann::json model_params = nlohmann::json::object();
    GridSpec grid;
    std::optional<McSpec> mc;
    OutputSpec output;
    std::optional<int> workers;
};

/// DomainError naming the violated precondition.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Largest x of the model's theoretical range: n^{1/6}, k^{1/6}, delta^{-1/3}
/// for the zero-bias band, or the edge of the informative gamma band.
double auto_x_max(const ExperimentConfig& c);

/// The standardized law the band is computed from.
ExactDistribution model_law(const ExperimentConfig& c);

struct McSummary {
    std::uint64_t samples = 0;
    int workers = 1;
    double tv = 0.0;
    std::uint64_t fingerprint = 0;  ///< FNV-1a of the raw sample stream
};

struct RunResult {
    ModelBandReport report;
    std::vector<double> grid;
    std::optional<McSummary> mc;
};

RunResult run_experiment(const ExperimentConfig& c);

/// Diagnostics JSON with the grid and Monte Carlo summary attached.
nlohmann::json diagnostics_json(const ExperimentConfig& c, const RunResult& r);

/// Csv: the table at output.path, diagnostics at output.path + ".diagnostics.json".
/// Json: one document {"table", "diagnostics"} at output.path. An empty path
/// writes to `fallback`.
void write_artifacts(const ExperimentConfig& c, const RunResult& r, std::ostream& fallback);

/// 0 ok, 2 DomainError, 3 IntegrityError, 4 ResourceError, 1 anything else.
int exit_code_of(const std::exception& e);

/// run_experiment + write_artifacts; errors are reported on `err` and mapped
/// to exit codes.
int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err);

enum class SuiteSize { Smoke, Full };

SuiteSize parse_suite_size(const std::string& s);

struct SuiteOptions {
    SuiteSize size = SuiteSize::Smoke;
    std::string out_dir;  ///< CSVs and summary.json; empty writes nothing
    std::uint64_t seed = 20240601;
    int workers = 1;
};

/// Band-stability schedules per model plus seeded sampler checks. The
/// summary lists fitted constants per model and n.
struct SuiteResult {
    nlohmann::json summary;
    bool pass = true;
};

SuiteResult suite(const SuiteOptions& o, std::ostream& log);

}  // namespace mdlab::runner
