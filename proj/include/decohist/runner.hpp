#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decohist/model.hpp"
#include "decohist/types.hpp"

namespace decohist {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
    std::string experiment;
    Json params = Json::object();  // overrides on top of the preset defaults
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;  // empty: nothing written
};

// Named columns of equal length plus metadata and summary scalars. Integers
// are stored as doubles and printed without a fractional part.
struct ResultTable {
    Json metadata = Json::object();
    Json summary = Json::object();
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add_column(const std::string& name, std::vector<double> values);
    bool has_column(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    void validate() const;
};

struct PresetInfo {
    std::string name;
    std::string figure;
    std::string description;
    Json defaults;
};

const std::vector<PresetInfo>& list_presets();
const PresetInfo& find_preset(const std::string& name);

// "a:b:steps" (inclusive, evenly spaced), "a,b,c", a number or a JSON array.
std::vector<double> parse_grid(const Json& value);

// Defaults merged with overrides; unknown keys and bad values are rejected.
Json resolve_config(const ExperimentConfig& config);
std::uint64_t config_hash(const Json& resolved);

ResultTable run(const ExperimentConfig& config);

// CSV: one "# {json}" metadata line, a header, then rows at %.17g. The
// summary goes to a JSON sidecar next to the CSV.
std::string to_csv(const ResultTable& table);
std::string csv_body(const ResultTable& table);  // header and rows only
std::string sidecar_path(const std::string& csv_path);
void write_result(const ResultTable& table, const std::string& csv_path);
ResultTable read_result(const std::string& csv_path);

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CriterionResult> results;
    bool pass() const;
};

// Criteria are {"criteria": [{name, op, column | summary, ...}]} with op one of
// abs_diff_le (target, tol), le / ge (value), in_range (lo, hi). A column
// criterion may add "where": {col: value} to pick rows and "reference": col to
// test the row-wise difference; "reduce" is all (default), max, min, mean or
// last. Summary entries use dotted paths.
VerifyReport verify(const ResultTable& table, const Json& criteria);
VerifyReport verify(const std::string& result_path, const std::string& criteria_path);

// Eigendecomposition checkpoints. Layout, all little-endian:
//   8 bytes  magic "DHEIGv01"
//   u64      D0, D1, seed
//   f64      delta_eps, lambda
//   u8       diagonal layout, u8 conserved
//   f64[D]   energies
//   f64[2·D·D] eigenvectors, row-major, (re, im) pairs
void save_checkpoint(const ModelSpec& model, bool conserved, const std::string& path);
ModelSpec load_checkpoint(const std::string& path, long d0, std::uint64_t seed, const ModelOptions& opts = {});

// Process-wide model cache, backed by DECOHIST_CACHE on disk when set.
const ModelSpec& shared_model(long d0, std::uint64_t seed, const ModelOptions& opts = {});
void clear_model_cache();

// Runs f(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot, so results do not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

using ProgressSink = std::function<void(const std::string&)>;
void set_progress_sink(ProgressSink sink);
void progress(const std::string& message);

}  // namespace decohist
