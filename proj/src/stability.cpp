#include "gradlab/stability.hpp"

#include <cmath>
#include <fstream>

#include "gradlab/optim.hpp"
#include "gradlab/rng.hpp"

namespace gradlab {

double chain_gradient(const ChainSpec& spec) {
    if (spec.depth < 1) throw InvalidInput("chain_gradient: depth must be >= 1");
    if (spec.gain < 0.0) throw InvalidInput("chain_gradient: gain must be >= 0");
    const double base = spec.skip ? spec.gain + 1.0 : spec.gain;
    return std::abs(spec.terminal_error) *
           std::pow(base, static_cast<double>(spec.depth));
}

Network scalar_chain_network(std::size_t depth, double gain, bool skip) {
    if (depth < 1) throw InvalidInput("scalar_chain_network: depth must be >= 1");
    std::vector<std::unique_ptr<Layer>> layers;
    auto head = std::make_unique<FullyConnected>(1, 1, /*with_bias=*/false);
    head->weight[0] = 1.0;
    layers.push_back(std::move(head));
    for (std::size_t i = 0; i < depth; ++i) {
        auto fc = std::make_unique<FullyConnected>(1, 1, /*with_bias=*/false);
        fc->weight[0] = gain;
        if (skip) {
            std::vector<std::unique_ptr<Layer>> inner;
            inner.push_back(std::move(fc));
            layers.push_back(std::make_unique<ResidualBlock>(std::move(inner)));
        } else {
            layers.push_back(std::move(fc));
        }
    }
    return Network(std::move(layers), Loss::Mse);
}

CaseReport case_analysis(double sigma, double eps) {
    if (sigma < 0.0) throw InvalidInput("case_analysis: sigma must be >= 0");
    if (eps <= 0.0) throw InvalidInput("case_analysis: eps must be positive");
    CaseReport report;
    report.sigma = sigma;
    report.scale_factor = 1.0 / (sigma + eps);
    if (report.scale_factor > 1.0) {
        report.regime = Regime::Amplifying;
    } else if (report.scale_factor < 1.0) {
        report.regime = Regime::Attenuating;
    } else {
        report.regime = Regime::Neutral;
    }
    return report;
}

std::vector<BlowupRow> convergence_blowup_demo(const std::vector<double>& sigma_sequence,
                                               double eps) {
    if (sigma_sequence.empty()) {
        throw InvalidInput("convergence_blowup_demo: sigma sequence is empty");
    }
    if (eps <= 0.0) throw InvalidInput("convergence_blowup_demo: eps must be positive");
    for (std::size_t i = 0; i < sigma_sequence.size(); ++i) {
        if (sigma_sequence[i] <= 0.0) {
            throw InvalidInput("convergence_blowup_demo: sigma values must be positive");
        }
        if (i > 0 && sigma_sequence[i] >= sigma_sequence[i - 1]) {
            throw InvalidInput("convergence_blowup_demo: sigma sequence must be strictly "
                               "decreasing");
        }
    }
    std::vector<BlowupRow> table;
    table.reserve(sigma_sequence.size());
    for (double sigma : sigma_sequence) {
        table.push_back({sigma, 1.0 / (sigma + eps)});
    }
    return table;
}

namespace {

Network build_chain_model(const ChainTrainSpec& spec, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(2 * spec.width));
    auto make_fc = [&](bool zero) {
        auto fc = std::make_unique<FullyConnected>(spec.width, spec.width, /*with_bias=*/false);
        if (!zero) {
            for (std::size_t i = 0; i < fc->weight.numel(); ++i) {
                fc->weight[i] = rng.uniform(-limit, limit);
            }
        }
        return fc;
    };
    std::vector<std::unique_ptr<Layer>> layers;
    for (std::size_t d = 0; d < spec.depth; ++d) {
        std::vector<std::unique_ptr<Layer>> path;
        path.push_back(make_fc(spec.zero_init));
        if (!spec.linear) path.push_back(std::make_unique<ReLU>());
        if (spec.skip) {
            layers.push_back(std::make_unique<ResidualBlock>(std::move(path)));
        } else {
            for (auto& l : path) layers.push_back(std::move(l));
        }
    }
    return Network(std::move(layers), Loss::Mse);
}

bool tensor_has_nonfinite(const Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) {
        if (!std::isfinite(t[i])) return true;
    }
    return false;
}

}  // namespace

ChainTrainResult trained_chain_experiment(const ChainTrainSpec& spec,
                                          const TransformPipeline& pipeline) {
    if (spec.depth < 1 || spec.depth > 64) {
        throw InvalidInput("trained_chain_experiment: depth must lie in [1, 64]");
    }
    if (spec.steps < 1 || spec.steps > 10000) {
        throw InvalidInput("trained_chain_experiment: steps must lie in [1, 10000]");
    }

    Rng rng(spec.seed);
    Network net = build_chain_model(spec, rng);

    // Fixed batch and fixed targets: a frozen quadratic objective.
    Tensor inputs({spec.batch, spec.width});
    for (std::size_t i = 0; i < inputs.numel(); ++i) inputs[i] = rng.normal();
    Tensor targets({spec.batch, spec.width});
    if (!spec.zero_targets) {
        for (std::size_t i = 0; i < targets.numel(); ++i) targets[i] = rng.normal();
    }
    const Batch batch{std::move(inputs), std::move(targets)};

    OptimizerState opt;
    opt.kind = OptimizerKind::Adam;
    opt.learning_rate = spec.learning_rate;

    ChainTrainResult result;
    for (std::size_t s = 1; s <= spec.steps; ++s) {
        const double loss = net.forward(batch).loss;
        std::vector<ParamGrad> grads = net.backward(batch);

        bool bad = !std::isfinite(loss);
        for (const ParamGrad& pg : grads) {
            if (tensor_has_nonfinite(pg.grad)) {
                bad = true;
                break;
            }
        }
        if (bad) result.nan_steps.push_back(s);
        if (!result.diverged && (!std::isfinite(loss) || std::abs(loss) > 1e12)) {
            result.diverged = true;
            result.divergence_step = s;
        }

        for (const ParamGrad& pg : grads) {
            if (pg.grad.rank() < 2) continue;
            const TensorStats st = stats(pg.grad);
            result.rows.push_back({s, pg.name, st.std, st.mean, loss,
                                   1.0 / (st.std + spec.report_eps)});
        }
        result.final_loss = loss;
        if (result.diverged) break;  // trajectory up to the divergence point is kept

        step(opt, pipeline, net, grads);
    }
    return result;
}

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::Amplifying:
            return "amplifying";
        case Regime::Neutral:
            return "neutral";
        case Regime::Attenuating:
            return "attenuating";
    }
    return "unknown";
}

void write_chain_csv(const ChainTrainResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "step,layer,grad_std,grad_mean,loss,scale_factor\n";
    out.precision(17);
    for (const ChainTrajectoryRow& row : result.rows) {
        out << row.step << ',' << row.layer << ',' << row.grad_std << ',' << row.grad_mean
            << ',' << row.loss << ',' << row.scale_factor << '\n';
    }
}

}  // namespace gradlab
