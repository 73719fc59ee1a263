#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradlab/network.hpp"
#include "gradlab/transforms.hpp"

namespace gradlab {

// Scalar stand-in for a depth-L backpropagation chain in which every layer
// multiplies the signal by gain g, optionally with an identity skip branch
// turning each factor into (g + 1).
struct ChainSpec {
    std::size_t depth = 1;      // L >= 1
    double gain = 0.0;          // g >= 0
    bool skip = false;
    double terminal_error = 1.0;  // delta_L
};

// |delta_L| * g^L without skip, |delta_L| * (g+1)^L with skip. Overflow
// surfaces as +infinity rather than an error.
double chain_gradient(const ChainSpec& spec);

// Scalar 1x1 linear chain matching ChainSpec: a leading unit-weight layer
// whose gradient is under test, then `depth` gain layers (residual-wrapped
// when skip is set). MSE loss.
Network scalar_chain_network(std::size_t depth, double gain, bool skip);

enum class Regime { Amplifying, Neutral, Attenuating };

struct CaseReport {
    double sigma = 0.0;
    double scale_factor = 0.0;  // 1 / (sigma + eps)
    Regime regime = Regime::Neutral;
};

// Classifies the effective per-element rescale 1/(sigma + eps): above 1
// the gradient is amplified, below 1 it is attenuated.
CaseReport case_analysis(double sigma, double eps);

struct BlowupRow {
    double sigma;
    double scale_factor;
};

// Tabulates 1/(sigma + eps) along a strictly decreasing sigma sequence,
// the shrinking-gradient regime near convergence. Scale factors increase
// toward 1/eps.
std::vector<BlowupRow> convergence_blowup_demo(const std::vector<double>& sigma_sequence,
                                               double eps);

struct ChainTrainSpec {
    std::size_t depth = 8;    // chain blocks, <= 64
    bool skip = true;
    std::size_t steps = 1000;  // <= 10^4
    std::uint64_t seed = 0;
    std::size_t width = 4;
    double learning_rate = 1e-3;
    std::size_t batch = 32;
    bool linear = false;       // drop the per-block ReLU
    bool zero_init = false;    // all-zero weights instead of seeded init
    bool zero_targets = false;
    double report_eps = 1e-8;  // eps used for the reported scale factor
};

struct ChainTrajectoryRow {
    std::size_t step;   // 1-based
    std::string layer;  // weight tensor name
    double grad_std;
    double grad_mean;
    double loss;
    double scale_factor;  // 1 / (grad_std + report_eps)
};

struct ChainTrainResult {
    std::vector<ChainTrajectoryRow> rows;
    std::vector<std::size_t> nan_steps;  // steps with a NaN/inf loss or gradient
    bool diverged = false;               // NaN or |loss| > 1e12
    std::size_t divergence_step = 0;     // 1-based, valid when diverged
    double final_loss = 0.0;
};

// Trains a depth-`depth` chain on a fixed seeded batch with Adam and the
// given pipeline, logging per-layer gradient statistics every step.
// Divergence is a recorded outcome, not an error.
ChainTrainResult trained_chain_experiment(const ChainTrainSpec& spec,
                                          const TransformPipeline& pipeline);

std::string regime_name(Regime regime);

// CSV emission for the trajectory table (columns: step, layer, grad_std,
// grad_mean, loss, scale_factor).
void write_chain_csv(const ChainTrainResult& result, const std::string& path);

}  // namespace gradlab
