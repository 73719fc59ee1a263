#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradlab/checkpoint.hpp"
#include "gradlab/config.hpp"
#include "gradlab/data.hpp"
#include "gradlab/network.hpp"
#include "gradlab/stability.hpp"
#include "gradlab/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitDivergence = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    bool quiet = false;
    std::int64_t seed_override = -1;
};

gradlab::RunConfig load_effective_config(const CommonOpts& opts) {
    gradlab::RunConfig config = gradlab::load_config(opts.config_path);
    if (opts.seed_override >= 0) {
        config.seed = static_cast<std::uint64_t>(opts.seed_override);
    }
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "run config file (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--seed", opts.seed_override, "override the config root seed");
    cmd->add_option("--out", opts.out_dir, "output directory for logs/reports");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

int cmd_train(const CommonOpts& opts) {
    const gradlab::RunConfig config = load_effective_config(opts);
    const gradlab::TrainResult result = gradlab::run_train(config, opts.out_dir, opts.quiet);
    if (!opts.quiet) {
        std::cout << "log: " << result.log_path << "\n"
                  << "checkpoint: " << result.checkpoint_path << "\n";
    }
    if (result.diverged) {
        std::cerr << "divergence detected at step " << result.divergence_step << "\n";
        return kExitDivergence;
    }
    return kExitOk;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint) {
    const gradlab::RunConfig config = load_effective_config(opts);
    const gradlab::MetricsRecord rec = gradlab::run_eval(config, checkpoint);
    std::cout << rec.to_json_line() << "\n";
    return kExitOk;
}

int cmd_compare(const CommonOpts& opts, std::vector<std::string> methods) {
    const gradlab::RunConfig config = load_effective_config(opts);
    if (methods.empty()) methods = gradlab::compare_method_tokens();
    const auto rows = gradlab::run_compare(config, methods, opts.out_dir, opts.quiet);
    gradlab::write_compare_reports(rows, opts.out_dir);
    std::cout << gradlab::format_compare_table(rows);
    return kExitOk;
}

int cmd_gradcheck(const CommonOpts& opts, double h, double tol) {
    const gradlab::RunConfig config = load_effective_config(opts);
    gradlab::Dataset ds = gradlab::build_dataset(config.dataset, config.data_seed());
    gradlab::Network net = gradlab::build_model(config.model, config.model_seed());

    const std::size_t count = std::min(config.schedule.batch_size, ds.train_idx.size());
    if (count == 0) throw gradlab::ConfigError("gradcheck: dataset has no train samples");
    const std::vector<std::size_t> head(ds.train_idx.begin(), ds.train_idx.begin() + count);
    const gradlab::Batch batch = gradlab::make_batch(ds, head);

    const gradlab::GradCheckReport report = gradlab::grad_check(net, batch, h, tol);
    for (const auto& entry : report.per_param) {
        std::printf("%-24s max_rel_err=%.3e\n", entry.name.c_str(), entry.max_rel_err);
    }
    std::printf("overall max_rel_err=%.3e tol=%.1e -> %s\n", report.max_rel_err, report.tol,
                report.pass ? "PASS" : "FAIL");
    return report.pass ? kExitOk : kExitRuntime;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-normalization optimization lab"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* train = app.add_subcommand("train", "train a model from a run config");
    add_common(train, opts);

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the config dataset");
    add_common(eval, opts);
    std::string checkpoint;
    eval->add_option("--checkpoint", checkpoint, "network checkpoint path")->required();

    auto* compare = app.add_subcommand("compare", "run the method comparison table");
    add_common(compare, opts);
    std::vector<std::string> methods;
    compare->add_option("--methods", methods,
                        "subset of: baseline centralization clipping wd1e-3 wd1e-4 znorm");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    add_common(gradcheck, opts);
    double gc_h = 1e-4, gc_tol = 1e-4;
    gradcheck->add_option("--step", gc_h, "finite-difference step");
    gradcheck->add_option("--tol", gc_tol, "relative-error tolerance");

    auto* stability = app.add_subcommand("stability", "gradient-scale stability analyses");
    stability->require_subcommand(1);

    auto* s_case = stability->add_subcommand("case", "classify the 1/(sigma+eps) rescale");
    double sigma = 0.5, eps = 1e-8;
    s_case->add_option("--sigma", sigma, "gradient standard deviation")->required();
    s_case->add_option("--eps", eps, "stabilizer epsilon");

    auto* s_chain = stability->add_subcommand("chain", "closed-form backprop chain magnitude");
    std::size_t depth = 10;
    double gain = 0.5, delta = 1.0;
    bool skip = false;
    s_chain->add_option("--depth", depth, "chain depth L");
    s_chain->add_option("--gain", gain, "per-layer gain g");
    s_chain->add_flag("--skip", skip, "include identity skip branches");
    s_chain->add_option("--delta", delta, "terminal error magnitude");

    auto* s_blowup = stability->add_subcommand("blowup", "scale factors for shrinking sigma");
    std::string sigmas = "1e-1,1e-3,1e-6";
    double blowup_eps = 1e-8;
    std::string blowup_out;
    s_blowup->add_option("--sigmas", sigmas, "comma-separated, strictly decreasing");
    s_blowup->add_option("--eps", blowup_eps, "stabilizer epsilon");
    s_blowup->add_option("--out", blowup_out, "CSV output path (default stdout)");

    auto* s_trained = stability->add_subcommand("trained", "train a chain and log gradients");
    gradlab::ChainTrainSpec chain_spec;
    std::string pipeline_names = "znorm";
    std::string trained_out = "chain_trajectory.csv";
    bool no_skip = false;
    s_trained->add_option("--depth", chain_spec.depth, "chain depth (<= 64)");
    s_trained->add_flag("--no-skip", no_skip, "plain chain without skip connections");
    s_trained->add_option("--steps", chain_spec.steps, "training steps (<= 10000)");
    s_trained->add_option("--seed", chain_spec.seed, "experiment seed");
    s_trained->add_option("--width", chain_spec.width, "chain width");
    s_trained->add_option("--lr", chain_spec.learning_rate, "Adam learning rate");
    s_trained->add_flag("--linear", chain_spec.linear, "drop per-block ReLU");
    s_trained->add_flag("--zero-init", chain_spec.zero_init, "start from all-zero weights");
    s_trained->add_flag("--zero-targets", chain_spec.zero_targets, "regress to zero targets");
    s_trained->add_option("--pipeline", pipeline_names,
                          "comma-separated transforms: znorm, centralize, clip, identity");
    s_trained->add_option("--out", trained_out, "trajectory CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*train) return cmd_train(opts);
        if (*eval) return cmd_eval(opts, checkpoint);
        if (*compare) return cmd_compare(opts, methods);
        if (*gradcheck) return cmd_gradcheck(opts, gc_h, gc_tol);
        if (*s_case) {
            const gradlab::CaseReport report = gradlab::case_analysis(sigma, eps);
            std::printf("sigma=%.10g scale_factor=%.10g regime=%s\n", report.sigma,
                        report.scale_factor, gradlab::regime_name(report.regime).c_str());
            return kExitOk;
        }
        if (*s_chain) {
            const double value = gradlab::chain_gradient({depth, gain, skip, delta});
            std::printf("depth=%zu gain=%.10g skip=%d value=%.10g overflow=%d\n", depth, gain,
                        skip ? 1 : 0, value, std::isinf(value) ? 1 : 0);
            return kExitOk;
        }
        if (*s_blowup) {
            const auto table =
                gradlab::convergence_blowup_demo(parse_double_list(sigmas), blowup_eps);
            std::ostringstream csv;
            csv << "sigma,scale_factor\n";
            csv.precision(17);
            for (const auto& row : table) csv << row.sigma << ',' << row.scale_factor << '\n';
            if (blowup_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(blowup_out);
                out << csv.str();
            }
            return kExitOk;
        }
        if (*s_trained) {
            chain_spec.skip = !no_skip;
            gradlab::TransformPipeline pipeline;
            std::stringstream ss(pipeline_names);
            std::string name;
            while (std::getline(ss, name, ',')) {
                if (name.empty()) continue;
                if (name == "znorm") pipeline.transforms.push_back(gradlab::make_znorm());
                else if (name == "centralize")
                    pipeline.transforms.push_back(gradlab::make_centralize());
                else if (name == "clip") pipeline.transforms.push_back(gradlab::make_clip(0.1));
                else if (name == "identity")
                    pipeline.transforms.push_back(gradlab::make_identity());
                else throw gradlab::ConfigError("stability trained: unknown transform '" +
                                                name + "'");
            }
            const gradlab::ChainTrainResult result =
                gradlab::trained_chain_experiment(chain_spec, pipeline);
            gradlab::write_chain_csv(result, trained_out);
            const std::size_t executed = result.rows.empty() ? 0 : result.rows.back().step;
            std::printf("steps=%zu nan_steps=%zu diverged=%d final_loss=%.10g csv=%s\n",
                        executed, result.nan_steps.size(), result.diverged ? 1 : 0,
                        result.final_loss, trained_out.c_str());
            return result.diverged ? kExitDivergence : kExitOk;
        }
    } catch (const gradlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const gradlab::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const gradlab::ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
