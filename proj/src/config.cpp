#include "gradlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gradlab {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& block,
                  const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ConfigError(block + ": unknown key '" + it.key() + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& block, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(block + "." + key + ": wrong type");
    }
}

DatasetConfig parse_dataset(const json& obj) {
    require_keys(obj, "dataset",
                 {"name", "n", "noise_std", "k", "size", "path", "label_column", "limit",
                  "train_fraction"});
    DatasetConfig d;
    d.name = get_or<std::string>(obj, "dataset", "name", "");
    if (d.name.empty()) throw ConfigError("dataset.name: required");
    static const std::set<std::string> names = {"two_moons", "blobs", "blob_masks",
                                                "cifar10", "csv", "container"};
    if (!names.count(d.name)) throw ConfigError("dataset.name: unknown dataset '" + d.name + "'");
    d.n = get_or<std::size_t>(obj, "dataset", "n", d.n);
    d.noise_std = get_or<double>(obj, "dataset", "noise_std", d.noise_std);
    d.k = get_or<std::size_t>(obj, "dataset", "k", d.k);
    d.size = get_or<std::size_t>(obj, "dataset", "size", d.size);
    d.path = get_or<std::string>(obj, "dataset", "path", d.path);
    d.label_column = get_or<std::string>(obj, "dataset", "label_column", d.label_column);
    d.limit = get_or<std::size_t>(obj, "dataset", "limit", d.limit);
    d.train_fraction = get_or<double>(obj, "dataset", "train_fraction", d.train_fraction);
    if (d.train_fraction < 0.0 || d.train_fraction > 1.0) {
        throw ConfigError("dataset.train_fraction: must lie in [0, 1]");
    }
    if ((d.name == "cifar10" || d.name == "csv" || d.name == "container") && d.path.empty()) {
        throw ConfigError("dataset.path: required for dataset '" + d.name + "'");
    }
    if (d.name == "csv" && d.label_column.empty()) {
        throw ConfigError("dataset.label_column: required for csv datasets");
    }
    return d;
}

ModelConfig parse_model(const json& obj) {
    require_keys(obj, "model",
                 {"name", "width", "depth", "in_dim", "out_dim", "channels", "blocks",
                  "classes", "in_channels", "loss"});
    ModelConfig m;
    m.name = get_or<std::string>(obj, "model", "name", "");
    if (m.name.empty()) throw ConfigError("model.name: required");
    static const std::set<std::string> names = {"residual_mlp", "tiny_resnet", "linear",
                                                "tiny_segnet"};
    if (!names.count(m.name)) throw ConfigError("model.name: unknown model '" + m.name + "'");
    m.width = get_or<std::size_t>(obj, "model", "width", m.width);
    m.depth = get_or<std::size_t>(obj, "model", "depth", m.depth);
    m.in_dim = get_or<std::size_t>(obj, "model", "in_dim", m.in_dim);
    m.out_dim = get_or<std::size_t>(obj, "model", "out_dim", m.out_dim);
    m.channels = get_or<std::size_t>(obj, "model", "channels", m.channels);
    m.blocks = get_or<std::size_t>(obj, "model", "blocks", m.blocks);
    m.classes = get_or<std::size_t>(obj, "model", "classes", m.classes);
    m.in_channels = get_or<std::size_t>(obj, "model", "in_channels", m.in_channels);
    m.loss = get_or<std::string>(obj, "model", "loss",
                                 std::string(m.name == "tiny_segnet" ? "binary_cross_entropy"
                                             : m.name == "linear"    ? "mse"
                                                : "softmax_cross_entropy"));
    parse_loss(m.loss);  // validates
    return m;
}

OptimizerState parse_optimizer(const json& obj) {
    require_keys(obj, "optimizer",
                 {"kind", "lr", "beta1", "beta2", "eps", "lambda", "momentum", "coupled_l2"});
    OptimizerState o;
    const std::string kind = get_or<std::string>(obj, "optimizer", "kind", "adam");
    if (kind == "sgd") o.kind = OptimizerKind::Sgd;
    else if (kind == "momentum") o.kind = OptimizerKind::Momentum;
    else if (kind == "adam") o.kind = OptimizerKind::Adam;
    else if (kind == "adamw") o.kind = OptimizerKind::AdamW;
    else throw ConfigError("optimizer.kind: unknown optimizer '" + kind + "'");
    o.learning_rate = get_or<double>(obj, "optimizer", "lr", o.learning_rate);
    o.beta1 = get_or<double>(obj, "optimizer", "beta1", o.beta1);
    o.beta2 = get_or<double>(obj, "optimizer", "beta2", o.beta2);
    o.eps = get_or<double>(obj, "optimizer", "eps", o.eps);
    o.weight_decay = get_or<double>(obj, "optimizer", "lambda", o.weight_decay);
    o.momentum = get_or<double>(obj, "optimizer", "momentum", o.momentum);
    o.coupled_l2 = get_or<bool>(obj, "optimizer", "coupled_l2", o.coupled_l2);
    if (o.learning_rate <= 0.0) throw ConfigError("optimizer.lr: must be positive");
    if (o.beta1 < 0.0 || o.beta1 >= 1.0) throw ConfigError("optimizer.beta1: must lie in [0, 1)");
    if (o.beta2 < 0.0 || o.beta2 >= 1.0) throw ConfigError("optimizer.beta2: must lie in [0, 1)");
    if (o.eps <= 0.0) throw ConfigError("optimizer.eps: must be positive");
    return o;
}

TransformPipeline parse_pipeline(const json& arr) {
    if (!arr.is_array()) throw ConfigError("pipeline: must be an ordered list of transforms");
    TransformPipeline p;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& entry = arr[i];
        const std::string block = "pipeline[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw ConfigError(block + ": must be an object");
        require_keys(entry, block, {"name", "eps", "tau", "min_rank", "min_count", "scope"});
        const std::string name = get_or<std::string>(entry, block, "name", "");
        GradTransform t;
        if (name == "znorm") t = make_znorm(get_or<double>(entry, block, "eps", 1e-8));
        else if (name == "centralize") t = make_centralize();
        else if (name == "clip") t = make_clip(get_or<double>(entry, block, "tau", 1.0));
        else if (name == "identity") t = make_identity();
        else throw ConfigError(block + ".name: unknown transform '" + name + "'");
        if (t.kind == TransformKind::ZNorm && t.eps <= 0.0) {
            throw ConfigError(block + ".eps: must be positive");
        }
        if (t.kind == TransformKind::Clip && t.tau <= 0.0) {
            throw ConfigError(block + ".tau: must be positive");
        }
        t.min_rank = get_or<int>(entry, block, "min_rank", t.min_rank);
        t.min_count = get_or<std::size_t>(entry, block, "min_count", t.min_count);
        const std::string scope = get_or<std::string>(entry, block, "scope", "per_layer");
        if (scope == "whole_model") t.whole_model = true;
        else if (scope != "per_layer") {
            throw ConfigError(block + ".scope: must be 'per_layer' or 'whole_model'");
        }
        p.transforms.push_back(t);
    }
    return p;
}

ScheduleConfig parse_schedule(const json& obj) {
    require_keys(obj, "schedule",
                 {"epochs", "batch_size", "lr_decay_factor", "lr_decay_every",
                  "lr_decay_start_epoch"});
    ScheduleConfig s;
    s.epochs = get_or<std::size_t>(obj, "schedule", "epochs", s.epochs);
    s.batch_size = get_or<std::size_t>(obj, "schedule", "batch_size", s.batch_size);
    s.lr_decay_factor = get_or<double>(obj, "schedule", "lr_decay_factor", s.lr_decay_factor);
    s.lr_decay_every = get_or<std::size_t>(obj, "schedule", "lr_decay_every", s.lr_decay_every);
    s.lr_decay_start_epoch =
        get_or<std::size_t>(obj, "schedule", "lr_decay_start_epoch", s.lr_decay_start_epoch);
    if (s.epochs < 1) throw ConfigError("schedule.epochs: must be >= 1");
    if (s.batch_size < 1) throw ConfigError("schedule.batch_size: must be >= 1");
    if (s.lr_decay_factor <= 0.0) throw ConfigError("schedule.lr_decay_factor: must be positive");
    return s;
}

EvalConfig parse_eval(const json& obj) {
    require_keys(obj, "eval", {"metrics", "eval_every"});
    EvalConfig e;
    if (obj.contains("metrics")) {
        e.metrics = obj.at("metrics").get<std::vector<std::string>>();
        static const std::set<std::string> known = {"accuracy", "f1", "tversky", "hausdorff"};
        for (const auto& m : e.metrics) {
            if (!known.count(m)) throw ConfigError("eval.metrics: unknown metric '" + m + "'");
        }
    }
    e.eval_every = get_or<std::size_t>(obj, "eval", "eval_every", e.eval_every);
    if (e.eval_every < 1) throw ConfigError("eval.eval_every: must be >= 1");
    return e;
}

OutputConfig parse_output(const json& obj) {
    require_keys(obj, "output", {"log_path", "checkpoint_path"});
    OutputConfig o;
    o.log_path = get_or<std::string>(obj, "output", "log_path", o.log_path);
    o.checkpoint_path = get_or<std::string>(obj, "output", "checkpoint_path", o.checkpoint_path);
    return o;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");
    require_keys(root, origin,
                 {"dataset", "model", "optimizer", "pipeline", "schedule", "eval", "output",
                  "seed"});
    if (!root.contains("dataset")) throw ConfigError(origin + ": missing 'dataset' block");
    if (!root.contains("model")) throw ConfigError(origin + ": missing 'model' block");

    RunConfig config;
    config.dataset = parse_dataset(root.at("dataset"));
    config.model = parse_model(root.at("model"));
    if (root.contains("optimizer")) config.optimizer = parse_optimizer(root.at("optimizer"));
    if (root.contains("pipeline")) config.pipeline = parse_pipeline(root.at("pipeline"));
    if (root.contains("schedule")) config.schedule = parse_schedule(root.at("schedule"));
    if (root.contains("eval")) config.eval = parse_eval(root.at("eval"));
    if (root.contains("output")) config.output = parse_output(root.at("output"));
    config.seed = get_or<std::uint64_t>(root, origin, "seed", 0);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

std::string canonical_config_json(const RunConfig& c) {
    json root;
    root["dataset"] = {{"name", c.dataset.name},
                       {"n", c.dataset.n},
                       {"noise_std", c.dataset.noise_std},
                       {"k", c.dataset.k},
                       {"size", c.dataset.size},
                       {"path", c.dataset.path},
                       {"label_column", c.dataset.label_column},
                       {"limit", c.dataset.limit},
                       {"train_fraction", c.dataset.train_fraction}};
    root["model"] = {{"name", c.model.name},         {"width", c.model.width},
                     {"depth", c.model.depth},       {"in_dim", c.model.in_dim},
                     {"out_dim", c.model.out_dim},   {"channels", c.model.channels},
                     {"blocks", c.model.blocks},     {"classes", c.model.classes},
                     {"in_channels", c.model.in_channels}, {"loss", c.model.loss}};
    root["optimizer"] = {{"kind", optimizer_name(c.optimizer.kind)},
                         {"lr", c.optimizer.learning_rate},
                         {"beta1", c.optimizer.beta1},
                         {"beta2", c.optimizer.beta2},
                         {"eps", c.optimizer.eps},
                         {"lambda", c.optimizer.weight_decay},
                         {"momentum", c.optimizer.momentum},
                         {"coupled_l2", c.optimizer.coupled_l2}};
    json pipeline = json::array();
    for (const GradTransform& t : c.pipeline.transforms) {
        json entry = {{"name", transform_name(t.kind)},
                      {"min_rank", t.min_rank},
                      {"min_count", t.min_count},
                      {"scope", t.whole_model ? "whole_model" : "per_layer"}};
        if (t.kind == TransformKind::ZNorm) entry["eps"] = t.eps;
        if (t.kind == TransformKind::Clip) entry["tau"] = t.tau;
        pipeline.push_back(entry);
    }
    root["pipeline"] = pipeline;
    root["schedule"] = {{"epochs", c.schedule.epochs},
                        {"batch_size", c.schedule.batch_size},
                        {"lr_decay_factor", c.schedule.lr_decay_factor},
                        {"lr_decay_every", c.schedule.lr_decay_every},
                        {"lr_decay_start_epoch", c.schedule.lr_decay_start_epoch}};
    root["eval"] = {{"metrics", c.eval.metrics}, {"eval_every", c.eval.eval_every}};
    root["output"] = {{"log_path", c.output.log_path},
                      {"checkpoint_path", c.output.checkpoint_path}};
    root["seed"] = c.seed;
    return root.dump();  // objects serialize with sorted keys
}

std::string config_hash(const RunConfig& config) {
    const std::string text = canonical_config_json(config);
    std::uint64_t hash = 1469598103934665603ull;  // FNV offset basis
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;  // FNV prime
    }
    static const char* digits = "0123456789abcdef";
    std::string hex(16, '0');
    for (int i = 15; i >= 0; --i) {
        hex[i] = digits[hash & 0xF];
        hash >>= 4;
    }
    return hex;
}

Loss parse_loss(const std::string& name) {
    if (name == "mse") return Loss::Mse;
    if (name == "softmax_cross_entropy") return Loss::SoftmaxCrossEntropy;
    if (name == "binary_cross_entropy") return Loss::BinaryCrossEntropy;
    throw ConfigError("model.loss: unknown loss '" + name + "'");
}

}  // namespace gradlab
