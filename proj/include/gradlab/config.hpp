#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradlab/optim.hpp"
#include "gradlab/transforms.hpp"

namespace gradlab {

// Thrown for malformed or inconsistent run configurations; messages name
// the offending block and key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::string name;  // two_moons | blobs | blob_masks | cifar10 | csv | container
    std::size_t n = 200;
    double noise_std = 0.1;   // two_moons
    std::size_t k = 3;        // blobs
    std::size_t size = 16;    // blob_masks
    std::string path;         // cifar10 | csv | container
    std::string label_column; // csv
    std::size_t limit = 0;    // cifar10 record cap, 0 = all
    double train_fraction = 0.8;
};

struct ModelConfig {
    std::string name;  // residual_mlp | tiny_resnet | linear | tiny_segnet
    std::size_t width = 16;
    std::size_t depth = 4;
    std::size_t in_dim = 2;
    std::size_t out_dim = 2;
    std::size_t channels = 4;
    std::size_t blocks = 2;
    std::size_t classes = 10;
    std::size_t in_channels = 3;
    std::string loss = "softmax_cross_entropy";  // mse | softmax_cross_entropy | binary_cross_entropy
};

struct ScheduleConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 256;
    double lr_decay_factor = 0.1;
    std::size_t lr_decay_every = 0;  // 0 disables decay
    std::size_t lr_decay_start_epoch = 0;
};

struct EvalConfig {
    std::vector<std::string> metrics = {"accuracy"};
    std::size_t eval_every = 1;
};

struct OutputConfig {
    std::string log_path = "metrics.jsonl";
    std::string checkpoint_path = "model.ckpt";
};

struct RunConfig {
    DatasetConfig dataset;
    ModelConfig model;
    OptimizerState optimizer;   // hyperparameters only; moments start empty
    TransformPipeline pipeline;
    ScheduleConfig schedule;
    EvalConfig eval;
    OutputConfig output;
    std::uint64_t seed = 0;

    // Derived seeds, documented offsets from the root seed.
    std::uint64_t data_seed() const { return seed + 1; }
    std::uint64_t model_seed() const { return seed + 2; }
    std::uint64_t shuffle_seed() const { return seed + 3; }
};

// Parses and validates a config file. Unknown keys anywhere are errors.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin);

// Canonical JSON of the effective config (defaults filled in), used for
// hashing and reproducibility records.
std::string canonical_config_json(const RunConfig& config);

// FNV-1a 64-bit over the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

Loss parse_loss(const std::string& name);

}  // namespace gradlab
