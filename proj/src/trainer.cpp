#include "gradlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "gradlab/checkpoint.hpp"
#include "gradlab/metrics.hpp"
#include "gradlab/optim.hpp"
#include "gradlab/rng.hpp"

namespace gradlab {

using nlohmann::json;

std::string MetricsRecord::to_json_line() const {
    json obj;
    obj["run_id"] = run_id;
    obj["epoch"] = epoch;
    obj["split"] = split;
    obj["loss"] = loss;
    obj["metrics"] = metrics;
    obj["wall_time"] = wall_time;
    obj["seed"] = seed;
    obj["config_hash"] = config_hash;
    return obj.dump();
}

std::string resolve_path(const std::string& dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || dir.empty()) return path;
    return (std::filesystem::path(dir) / p).string();
}

Dataset build_dataset(const DatasetConfig& config, std::uint64_t data_seed) {
    Dataset ds;
    if (config.name == "two_moons") {
        ds = gen_two_moons(config.n, config.noise_std, data_seed);
    } else if (config.name == "blobs") {
        ds = gen_blobs(config.n, config.k, data_seed);
    } else if (config.name == "blob_masks") {
        ds = gen_blob_masks(config.n, config.size, data_seed);
    } else if (config.name == "cifar10") {
        ds = read_cifar10_binary(config.path, config.limit);
    } else if (config.name == "csv") {
        ds = read_csv(config.path, config.label_column);
    } else if (config.name == "container") {
        // Containers carry their own split; keep it.
        return read_dataset(config.path);
    } else {
        throw ConfigError("dataset.name: unknown dataset '" + config.name + "'");
    }
    split_dataset(ds, config.train_fraction, data_seed);
    return ds;
}

Network build_model(const ModelConfig& config, std::uint64_t model_seed) {
    Network net;
    if (config.name == "residual_mlp") {
        net = make_residual_mlp(config.width, config.depth, config.in_dim, config.out_dim,
                                model_seed);
    } else if (config.name == "tiny_resnet") {
        net = make_tiny_resnet(config.channels, config.blocks, config.classes, model_seed,
                               config.in_channels);
    } else if (config.name == "linear") {
        net = make_linear(config.in_dim, config.out_dim, model_seed);
    } else if (config.name == "tiny_segnet") {
        net = make_tiny_segnet(config.channels, model_seed, config.in_channels);
    } else {
        throw ConfigError("model.name: unknown model '" + config.name + "'");
    }
    net.set_loss(parse_loss(config.loss));
    return net;
}

namespace {

std::size_t sample_stride(const Tensor& t) {
    std::size_t stride = 1;
    for (std::size_t d = 1; d < t.rank(); ++d) stride *= t.extent(d);
    return stride;
}

Tensor gather_rows(const Tensor& src, const std::vector<std::size_t>& order, std::size_t start,
                   std::size_t count) {
    Shape shape = src.shape();
    shape[0] = count;
    Tensor out(shape);
    const std::size_t stride = sample_stride(src);
    for (std::size_t i = 0; i < count; ++i) {
        const double* from = src.data() + order[start + i] * stride;
        std::copy(from, from + stride, out.data() + i * stride);
    }
    return out;
}

Batch gather_batch(const Dataset& ds, const std::vector<std::size_t>& order, std::size_t start,
                   std::size_t count) {
    return {gather_rows(ds.inputs, order, start, count),
            gather_rows(ds.targets, order, start, count)};
}

bool is_divergent(double loss) { return !std::isfinite(loss) || std::abs(loss) > 1e12; }

}  // namespace

Batch make_batch(const Dataset& ds, const std::vector<std::size_t>& indices) {
    return gather_batch(ds, indices, 0, indices.size());
}

namespace {

void check_metric_applicability(const RunConfig& config) {
    const Loss loss = parse_loss(config.model.loss);
    for (const std::string& m : config.eval.metrics) {
        if (m == "accuracy" && loss == Loss::Mse) {
            throw ConfigError("eval.metrics: 'accuracy' needs a classification loss");
        }
        if ((m == "f1" || m == "tversky" || m == "hausdorff") &&
            loss != Loss::BinaryCrossEntropy) {
            throw ConfigError("eval.metrics: '" + m + "' needs binary_cross_entropy masks");
        }
    }
}

}  // namespace

std::pair<double, std::map<std::string, double>> evaluate_split(
    Network& net, const Dataset& ds, const std::vector<std::size_t>& indices,
    const std::vector<std::string>& metric_names) {
    if (indices.empty()) throw InvalidInput("evaluate_split: empty split");

    constexpr std::size_t kChunk = 256;
    double loss_acc = 0.0;
    std::vector<int> predictions, labels;
    ConfusionCounts pixel_counts;
    double hausdorff_sum = 0.0;
    std::size_t hausdorff_valid = 0;

    const Loss loss_kind = net.loss();
    for (std::size_t start = 0; start < indices.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, indices.size() - start);
        const Batch batch = gather_batch(ds, indices, start, count);
        const ForwardResult fr = net.forward(batch);
        loss_acc += fr.loss * static_cast<double>(count);

        if (loss_kind == Loss::SoftmaxCrossEntropy) {
            const std::size_t k = fr.output.extent(1);
            for (std::size_t r = 0; r < count; ++r) {
                const double* row = fr.output.data() + r * k;
                std::size_t best = 0;
                for (std::size_t c = 1; c < k; ++c) {
                    if (row[c] > row[best]) best = c;
                }
                predictions.push_back(static_cast<int>(best));
                labels.push_back(static_cast<int>(batch.targets[r]));
            }
        } else if (loss_kind == Loss::BinaryCrossEntropy) {
            const std::size_t per_sample = fr.output.numel() / count;
            if (per_sample == 1) {
                for (std::size_t r = 0; r < count; ++r) {
                    predictions.push_back(fr.output[r] > 0.0 ? 1 : 0);
                    labels.push_back(batch.targets[r] > 0.5 ? 1 : 0);
                }
            } else {
                // Mask outputs: pool pixel confusion globally; Hausdorff
                // is averaged over samples where both masks are nonempty.
                const std::size_t h = batch.targets.extent(batch.targets.rank() - 2);
                const std::size_t w = batch.targets.extent(batch.targets.rank() - 1);
                for (std::size_t r = 0; r < count; ++r) {
                    Tensor pred_mask({h, w});
                    Tensor true_mask({h, w});
                    for (std::size_t i = 0; i < h * w; ++i) {
                        const double logit = fr.output[r * per_sample + i];
                        pred_mask[i] = 1.0 / (1.0 + std::exp(-logit));
                        true_mask[i] = batch.targets[r * h * w + i];
                    }
                    const ConfusionCounts c = confusion(pred_mask, true_mask, 0.5);
                    pixel_counts.tp += c.tp;
                    pixel_counts.fp += c.fp;
                    pixel_counts.tn += c.tn;
                    pixel_counts.fn += c.fn;
                    const PointSet p = mask_to_pointset(pred_mask);
                    const PointSet g = mask_to_pointset(true_mask);
                    if (!p.empty() && !g.empty()) {
                        hausdorff_sum += hausdorff(p, g);
                        ++hausdorff_valid;
                    }
                }
            }
        }
    }

    std::map<std::string, double> values;
    for (const std::string& name : metric_names) {
        if (name == "accuracy") {
            if (!predictions.empty()) {
                values["accuracy"] = accuracy(predictions, labels);
            } else if (pixel_counts.total() > 0) {
                values["accuracy"] = static_cast<double>(pixel_counts.tp + pixel_counts.tn) /
                                     static_cast<double>(pixel_counts.total());
            }
        } else if (name == "f1") {
            values["f1"] = f1(pixel_counts);
        } else if (name == "tversky") {
            values["tversky"] = tversky(pixel_counts, 0.5, 0.5);
        } else if (name == "hausdorff" && hausdorff_valid > 0) {
            values["hausdorff"] = hausdorff_sum / static_cast<double>(hausdorff_valid);
        }
    }
    return {loss_acc / static_cast<double>(indices.size()), values};
}

TrainResult run_train(const RunConfig& config, const std::string& out_dir, bool quiet) {
    check_metric_applicability(config);

    Dataset ds = build_dataset(config.dataset, config.data_seed());
    if (ds.train_idx.empty()) throw ConfigError("dataset: train split is empty");
    if (config.schedule.batch_size > ds.train_idx.size()) {
        throw ConfigError("schedule.batch_size: " + std::to_string(config.schedule.batch_size) +
                          " exceeds train split size " + std::to_string(ds.train_idx.size()));
    }

    TrainResult result;
    result.net = build_model(config.model, config.model_seed());
    result.log_path = resolve_path(out_dir, config.output.log_path);
    result.checkpoint_path = resolve_path(out_dir, config.output.checkpoint_path);

    for (const std::string& p : {result.log_path, result.checkpoint_path}) {
        const auto parent = std::filesystem::path(p).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    std::ofstream log(result.log_path);
    if (!log) throw std::runtime_error("cannot open " + result.log_path + " for writing");

    const std::string hash = config_hash(config);
    const std::string run_id = hash + "-s" + std::to_string(config.seed);
    const auto run_start = std::chrono::steady_clock::now();
    const auto elapsed = [&run_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start)
            .count();
    };

    OptimizerState opt = config.optimizer;
    Rng shuffle_rng(config.shuffle_seed());
    std::vector<std::size_t> order = ds.train_idx;
    std::size_t global_step = 0;

    const auto emit = [&](std::size_t epoch, const std::string& split,
                          const std::vector<std::size_t>& indices) {
        auto [loss, values] = evaluate_split(result.net, ds, indices, config.eval.metrics);
        MetricsRecord rec;
        rec.run_id = run_id;
        rec.epoch = epoch;
        rec.split = split;
        rec.loss = loss;
        rec.metrics = std::move(values);
        if (result.diverged) {
            rec.metrics["diverged"] = 1.0;
            rec.metrics["divergence_step"] = static_cast<double>(result.divergence_step);
        }
        rec.wall_time = elapsed();
        rec.seed = config.seed;
        rec.config_hash = hash;
        log << rec.to_json_line() << '\n';
        log.flush();
        result.records.push_back(std::move(rec));
    };

    for (std::size_t epoch = 1; epoch <= config.schedule.epochs; ++epoch) {
        if (config.schedule.lr_decay_every > 0 && epoch >= config.schedule.lr_decay_start_epoch &&
            (epoch - config.schedule.lr_decay_start_epoch) % config.schedule.lr_decay_every ==
                0) {
            opt.learning_rate *= config.schedule.lr_decay_factor;
        }

        shuffle(order, shuffle_rng);
        double loss_acc = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size() && !result.diverged;
             start += config.schedule.batch_size) {
            const std::size_t count = std::min(config.schedule.batch_size, order.size() - start);
            const Batch batch = gather_batch(ds, order, start, count);
            double loss = 0.0;
            std::vector<ParamGrad> grads = result.net.backward(batch, &loss);
            ++global_step;
            loss_acc += loss * static_cast<double>(count);
            seen += count;
            if (is_divergent(loss)) {
                result.diverged = true;
                result.divergence_step = global_step;
                break;
            }
            step(opt, config.pipeline, result.net, grads);
        }
        result.epoch_train_loss.push_back(seen ? loss_acc / static_cast<double>(seen)
                                               : std::numeric_limits<double>::quiet_NaN());

        const bool last = epoch == config.schedule.epochs || result.diverged;
        if (epoch % config.eval.eval_every == 0 || last) {
            emit(epoch, "train", ds.train_idx);
            if (!ds.test_idx.empty()) emit(epoch, "test", ds.test_idx);
        }
        if (!quiet) {
            std::cerr << "epoch " << epoch << "/" << config.schedule.epochs
                      << " train_loss=" << result.epoch_train_loss.back() << "\n";
        }
        if (result.diverged) break;
    }

    save_network(result.net, result.checkpoint_path);
    return result;
}

MetricsRecord run_eval(const RunConfig& config, const std::string& checkpoint_path) {
    check_metric_applicability(config);
    Dataset ds = build_dataset(config.dataset, config.data_seed());
    Network net = load_network(checkpoint_path);
    net.set_loss(parse_loss(config.model.loss));

    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    if (all.empty()) throw InvalidInput("eval: dataset is empty");

    auto [loss, values] = evaluate_split(net, ds, all, config.eval.metrics);
    MetricsRecord rec;
    rec.run_id = config_hash(config) + "-s" + std::to_string(config.seed);
    rec.epoch = 0;
    rec.split = "eval";
    rec.loss = loss;
    rec.metrics = std::move(values);
    rec.wall_time = 0.0;
    rec.seed = config.seed;
    rec.config_hash = config_hash(config);
    return rec;
}

// -------------------------------------------------------------------- compare

namespace {

struct MethodSpec {
    std::string token;
    std::string display;
};

const std::vector<MethodSpec>& method_table() {
    // Row order follows the comparison tables: baseline, centralization,
    // clipping, the two decay rates, then znorm.
    static const std::vector<MethodSpec> table = {
        {"baseline", "Baseline"},
        {"centralization", "Gradient Centralization"},
        {"clipping", "Gradient Clipping"},
        {"wd1e-3", "Weight Decay 1E-3"},
        {"wd1e-4", "Weight Decay 1E-4"},
        {"znorm", "ZNorm"},
    };
    return table;
}

RunConfig method_config(const RunConfig& base, const std::string& token) {
    RunConfig config = base;
    config.pipeline.transforms.clear();
    config.optimizer.kind = OptimizerKind::Adam;
    config.optimizer.weight_decay = 0.0;
    if (token == "baseline") {
        // plain Adam
    } else if (token == "centralization") {
        config.pipeline.transforms.push_back(make_centralize());
    } else if (token == "clipping") {
        config.pipeline.transforms.push_back(make_clip(0.1));
    } else if (token == "wd1e-3") {
        config.optimizer.kind = OptimizerKind::AdamW;
        config.optimizer.weight_decay = 1e-3;
    } else if (token == "wd1e-4") {
        config.optimizer.kind = OptimizerKind::AdamW;
        config.optimizer.weight_decay = 1e-4;
    } else if (token == "znorm") {
        config.pipeline.transforms.push_back(make_znorm(1e-8));
    } else {
        throw ConfigError("compare: unknown method '" + token + "'");
    }
    const std::string stem = "compare_" + token;
    config.output.log_path = stem + ".jsonl";
    config.output.checkpoint_path = stem + ".ckpt";
    return config;
}

}  // namespace

const std::vector<std::string>& compare_method_tokens() {
    static const std::vector<std::string> tokens = [] {
        std::vector<std::string> out;
        for (const MethodSpec& m : method_table()) out.push_back(m.token);
        return out;
    }();
    return tokens;
}

std::vector<CompareRow> run_compare(const RunConfig& base,
                                    const std::vector<std::string>& methods,
                                    const std::string& out_dir, bool quiet) {
    if (methods.empty()) throw ConfigError("compare: method list is empty");
    // Preserve table row order regardless of the order given.
    std::vector<std::string> ordered;
    for (const MethodSpec& m : method_table()) {
        if (std::find(methods.begin(), methods.end(), m.token) != methods.end()) {
            ordered.push_back(m.token);
        }
    }
    for (const std::string& m : methods) {
        if (std::find(ordered.begin(), ordered.end(), m) == ordered.end()) {
            throw ConfigError("compare: unknown method '" + m + "'");
        }
    }

    std::vector<CompareRow> rows;
    for (const std::string& token : ordered) {
        const RunConfig config = method_config(base, token);
        if (!quiet) std::cerr << "compare: running " << token << "\n";
        TrainResult tr = run_train(config, out_dir, quiet);

        CompareRow row;
        row.method = token;
        for (const MethodSpec& m : method_table()) {
            if (m.token == token) row.display_name = m.display;
        }
        row.shared_seed = base.seed;
        row.diverged = tr.diverged;
        row.train_loss = tr.epoch_train_loss.empty() ? 0.0 : tr.epoch_train_loss.back();
        row.epoch_train_loss = tr.epoch_train_loss;
        for (auto it = tr.records.rbegin(); it != tr.records.rend(); ++it) {
            if (it->split == "test" && it->metrics.count("accuracy")) {
                row.test_accuracy = it->metrics.at("accuracy");
                row.has_test_accuracy = true;
                break;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_compare_table(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "Methods                   | Test Accuracy | Train Loss\n";
    out << "--------------------------+---------------+-----------\n";
    char buf[64];
    for (const CompareRow& row : rows) {
        out << row.display_name;
        for (std::size_t i = row.display_name.size(); i < 26; ++i) out << ' ';
        if (row.has_test_accuracy) {
            std::snprintf(buf, sizeof(buf), "| %13.4f ", row.test_accuracy);
        } else {
            std::snprintf(buf, sizeof(buf), "| %13s ", "n/a");
        }
        out << buf;
        std::snprintf(buf, sizeof(buf), "| %10.4f", row.train_loss);
        out << buf;
        if (row.diverged) out << "  (diverged)";
        out << '\n';
    }
    if (!rows.empty()) {
        out << "(all methods share root seed " << rows.front().shared_seed
            << ": identical data, split, init, and batch order)\n";
    }
    return out.str();
}

void write_compare_reports(const std::vector<CompareRow>& rows, const std::string& out_dir) {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    {
        std::ofstream txt(resolve_path(out_dir, "compare_report.txt"));
        txt << format_compare_table(rows);
    }
    std::ofstream csv(resolve_path(out_dir, "compare_report.csv"));
    csv << "method,test_accuracy,train_loss,diverged,seed\n";
    csv.precision(17);
    for (const CompareRow& row : rows) {
        csv << row.method << ',';
        if (row.has_test_accuracy) csv << row.test_accuracy;
        csv << ',' << row.train_loss << ',' << (row.diverged ? 1 : 0) << ','
            << row.shared_seed << '\n';
    }
}

}  // namespace gradlab
