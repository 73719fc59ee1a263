#pragma once

#include <map>
#include <string>
#include <vector>

#include "gradlab/config.hpp"
#include "gradlab/data.hpp"
#include "gradlab/network.hpp"

namespace gradlab {

// One structured log row per (epoch, split) evaluation. Serialized as one
// JSON object per line; schema documented in docs/formats.md.
struct MetricsRecord {
    std::string run_id;
    std::size_t epoch = 0;
    std::string split;
    double loss = 0.0;
    std::map<std::string, double> metrics;
    double wall_time = 0.0;  // seconds since run start; excluded from determinism checks
    std::uint64_t seed = 0;
    std::string config_hash;

    std::string to_json_line() const;
};

struct TrainResult {
    Network net;
    std::vector<MetricsRecord> records;
    std::vector<double> epoch_train_loss;  // running batch-mean loss per epoch
    bool diverged = false;
    std::size_t divergence_step = 0;  // 1-based global step
    std::string log_path;
    std::string checkpoint_path;
};

Dataset build_dataset(const DatasetConfig& config, std::uint64_t data_seed);
Network build_model(const ModelConfig& config, std::uint64_t model_seed);

// Copies the given samples into a contiguous batch.
Batch make_batch(const Dataset& ds, const std::vector<std::size_t>& indices);

// Full config-driven training run: deterministic given the config, writes
// the JSONL metrics log and final checkpoint under out_dir.
TrainResult run_train(const RunConfig& config, const std::string& out_dir, bool quiet);

// Loss and requested metrics of `net` over the given sample indices.
std::pair<double, std::map<std::string, double>> evaluate_split(
    Network& net, const Dataset& ds, const std::vector<std::size_t>& indices,
    const std::vector<std::string>& metric_names);

MetricsRecord run_eval(const RunConfig& config, const std::string& checkpoint_path);

struct CompareRow {
    std::string method;        // CLI token
    std::string display_name;  // table row label
    double test_accuracy = 0.0;
    bool has_test_accuracy = false;
    double train_loss = 0.0;
    bool diverged = false;
    std::uint64_t shared_seed = 0;  // root seed common to every method
    std::vector<double> epoch_train_loss;
};

// The six comparison baselines, in table row order.
const std::vector<std::string>& compare_method_tokens();

// One training run per method with a shared root seed (identical data,
// split, initialization and shuffle order); only the optimizer/pipeline
// blocks differ.
std::vector<CompareRow> run_compare(const RunConfig& base,
                                    const std::vector<std::string>& methods,
                                    const std::string& out_dir, bool quiet);

std::string format_compare_table(const std::vector<CompareRow>& rows);
void write_compare_reports(const std::vector<CompareRow>& rows, const std::string& out_dir);

// Joins relative paths under dir; absolute paths pass through.
std::string resolve_path(const std::string& dir, const std::string& path);

}  // namespace gradlab
