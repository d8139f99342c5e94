#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voterlab/config.hpp"
#include "voterlab/json_io.hpp"
#include "voterlab/kernel.hpp"
#include "voterlab/parallel.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

/// One CSV output. Cells are JSON scalars; doubles print with 17
/// significant digits so reruns are byte-identical.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void add(std::vector<Json> row) { rows.push_back(std::move(row)); }
};

struct SuiteResult {
    std::string suite;
    bool pass = true;
    Json metrics = Json::object();
    std::vector<std::string> failures;
    std::deque<Table> tables;  // stable references while tables are added

    /// Records a failed hard assertion.
    void fail(std::string what)
    {
        pass = false;
        failures.push_back(std::move(what));
    }
    Table& table(const std::string& name, std::vector<std::string> columns);
};

struct SuiteOptions {
    std::uint64_t seed = 0;
    Parallelism par;
    /// Directory for binary event-log dumps (duality suite), if requested.
    std::optional<std::filesystem::path> log_dir;
};

SuiteResult run_duality_suite(const ExperimentConfig& config, const SuiteOptions& options);
SuiteResult run_generator_suite(const ExperimentConfig& config, const SuiteOptions& options);
SuiteResult run_meeting_suite(const ExperimentConfig& config, const SuiteOptions& options);
SuiteResult run_convergence_sweep(const ExperimentConfig& config, const SuiteOptions& options);
SuiteResult run_atomic_suite(const ExperimentConfig& config, const SuiteOptions& options);

/// Names accepted by run_suite: duality, generators, meeting, sweep, atomic.
const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, const ExperimentConfig& config, const SuiteOptions& options);

/// Writes report.json and one <table>.csv per table into out_dir.
void emit_report(const SuiteResult& result, const ExperimentConfig& config, const SuiteOptions& options,
                 const std::filesystem::path& out_dir);

std::string csv_cell(const Json& value);

/// Kernel of the configured family at size n (keys family, p, graph_seed,
/// or an inline kernel object).
Kernel kernel_for_size(const ExperimentConfig& config, std::size_t n);

/// Sizes from "sizes" (strictly increasing) or the single "n".
std::vector<std::size_t> config_sizes(const ExperimentConfig& config);

/// "time_grid", nonnegative and strictly increasing; defaults to
/// {0, 0.25, 0.5, 1, 2, 3}.
std::vector<double> config_time_grid(const ExperimentConfig& config);

/// Type space and target mutation measure at size n from "types" and
/// "mutation".
struct TypeSetup {
    TypeSpace space;
    MutationMeasure mutation;  // target mu; the size-n model uses mu / gamma_n
};
TypeSetup type_setup(const ExperimentConfig& config, std::size_t n);

}  // namespace voterlab
