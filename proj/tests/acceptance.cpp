// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end checks live here rather than in the unit
// tests; everything is deterministic and self-contained.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradlab/checkpoint.hpp"
#include "gradlab/config.hpp"
#include "gradlab/data.hpp"
#include "gradlab/metrics.hpp"
#include "gradlab/network.hpp"
#include "gradlab/optim.hpp"
#include "gradlab/rng.hpp"
#include "gradlab/stability.hpp"
#include "gradlab/trainer.hpp"
#include "gradlab/transforms.hpp"

using namespace gradlab;

namespace {

int failures = 0;
std::vector<std::string> messages;

void expect(bool ok, const std::string& detail) {
    if (!ok) {
        ++failures;
        messages.push_back(detail);
    }
}

struct Criterion {
    int id;
    const char* title;
    std::function<void()> body;
    double time_limit_s;  // 0 = no limit
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "gradlab_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------- criterion 1

void criterion_znorm_statistics() {
    Rng rng(1001);
    int tested = 0;
    while (tested < 1000) {
        const std::size_t rank = 2 + rng.below(3);
        Shape shape;
        std::size_t numel = 1;
        for (std::size_t d = 0; d < rank; ++d) {
            const std::size_t e = 1 + rng.below(rank == 2 ? 64 : 16);
            shape.push_back(e);
            numel *= e;
        }
        if (numel < 4 || numel > 4096) continue;

        Tensor g(shape);
        const double spread = std::pow(10.0, rng.uniform(-2.0, 1.0));
        const double offset = rng.uniform(-5.0, 5.0);
        for (std::size_t i = 0; i < numel; ++i) g[i] = offset + spread * rng.normal();
        const TensorStats in = stats(g);
        if (in.std < 1e-2) continue;
        ++tested;

        const Tensor out = znorm(g, 1e-8);
        const TensorStats post = stats(out);
        expect(post.mean >= -1e-9 && post.mean <= 1e-9,
               "criterion 1: output mean " + std::to_string(post.mean));
        const double want = in.std / (in.std + 1e-8);
        expect(std::abs(post.std - want) <= 1e-9,
               "criterion 1: output std " + std::to_string(post.std) + " vs " +
                   std::to_string(want));
    }
}

// ---------------------------------------------------------------- criterion 2

void criterion_degenerate_cases() {
    for (double c : {5.0, 0.1, -3.7e-6, 123456.789}) {
        for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(7)}) {
            const Tensor out = znorm(Tensor::full({n, 1}, c), 1e-8);
            for (std::size_t i = 0; i < out.numel(); ++i) {
                expect(out[i] == 0.0, "criterion 2: znorm(constant) not exactly zero");
            }
        }
    }

    // single-element tensors pass through every pipeline untouched
    TransformPipeline pipeline{{make_znorm(1e-8), make_centralize(), make_clip(1e-6)}};
    std::vector<ParamGrad> grads;
    grads.push_back({"w", Tensor::zeros({1, 1}), Tensor({1, 1}, {42.5})});
    grads.push_back({"s", Tensor::scalar(0.0), Tensor::scalar(-7.0)});
    const auto out = pipeline.apply(grads);
    expect(out[0].grad[0] == 42.5, "criterion 2: single-element tensor modified");
    expect(out[1].grad[0] == -7.0, "criterion 2: scalar tensor modified");
}

// ---------------------------------------------------------------- criterion 3

void write_synthetic_cifar(const std::string& path, std::size_t n, std::uint64_t seed) {
    // Class-dependent pixel templates plus noise, stored in the CIFAR-10
    // binary batch layout. Learnable at desk scale; not the real dataset.
    Rng rng(seed);
    std::vector<double> templates(10 * 3072);
    for (auto& v : templates) v = rng.uniform() < 0.5 ? -1.0 : 1.0;

    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char label = static_cast<unsigned char>(i % 10);
        out.put(static_cast<char>(label));
        const double* tpl = templates.data() + label * 3072;
        for (std::size_t p = 0; p < 3072; ++p) {
            const double value = 128.0 + 60.0 * tpl[p] + 20.0 * rng.normal();
            const int byte = std::max(0, std::min(255, static_cast<int>(std::lround(value))));
            out.put(static_cast<char>(static_cast<unsigned char>(byte)));
        }
    }
}

void criterion_gradient_exactness() {
    {  // linear net, MSE: exact to 1e-8
        RunConfig config = load_config("presets/gradcheck_linear.json");
        Dataset ds = build_dataset(config.dataset, config.data_seed());
        Network net = build_model(config.model, config.model_seed());
        const std::vector<std::size_t> head(ds.train_idx.begin(),
                                            ds.train_idx.begin() +
                                                std::min<std::size_t>(8, ds.train_idx.size()));
        const GradCheckReport report = grad_check(net, make_batch(ds, head), 1e-4, 1e-8);
        expect(report.pass, "criterion 3: linear/MSE grad check err " +
                                std::to_string(report.max_rel_err));
    }

    {  // residual MLP depth 4 width 8
        RunConfig config = load_config("presets/gradcheck_residual_mlp.json");
        Dataset ds = build_dataset(config.dataset, config.data_seed());
        Network net = build_model(config.model, config.model_seed());
        const std::vector<std::size_t> head(ds.train_idx.begin(), ds.train_idx.begin() + 8);
        const GradCheckReport report = grad_check(net, make_batch(ds, head), 1e-4, 1e-4);
        expect(report.pass, "criterion 3: residual MLP grad check err " +
                                std::to_string(report.max_rel_err));
    }

    {  // tiny conv net (resnet-style) on a small CIFAR-format fixture
        RunConfig config = load_config("presets/gradcheck_tiny_conv.json");
        // fixture seed picked clear of ReLU kinks at h = 1e-4
        const std::string fixture = (work_dir() / "gradcheck_cifar.bin").string();
        if (!std::filesystem::exists(fixture)) write_synthetic_cifar(fixture, 16, 555);
        config.dataset.path = fixture;
        Dataset ds = build_dataset(config.dataset, config.data_seed());
        Network net = build_model(config.model, config.model_seed());
        const std::vector<std::size_t> head(ds.train_idx.begin(), ds.train_idx.begin() + 2);
        const GradCheckReport report = grad_check(net, make_batch(ds, head), 1e-4, 1e-4);
        expect(report.pass, "criterion 3: conv grad check err " +
                                std::to_string(report.max_rel_err));
    }
}

// ---------------------------------------------------------------- criterion 4

void criterion_skip_bound() {
    // closed form vs autodiff on scalar chains
    for (bool skip : {false, true}) {
        for (double gain : {0.1, 0.5, 0.9}) {
            for (std::size_t depth : {std::size_t(1), std::size_t(10), std::size_t(50)}) {
                Network net = scalar_chain_network(depth, gain, skip);
                const double y = chain_gradient({depth, gain, skip, 1.0});
                const auto grads =
                    net.backward({Tensor({1, 1}, {1.0}), Tensor({1, 1}, {0.0})});
                const double expected = chain_gradient({depth, gain, skip, 2.0 * y});
                const double actual = std::abs(grads.front().grad[0]);
                expect(std::abs(actual - expected) <= 1e-10 * std::abs(expected),
                       "criterion 4: autodiff mismatch at g=" + std::to_string(gain) +
                           " L=" + std::to_string(depth));
            }
        }
    }

    // monotone decay without skips; >= 1 with skips
    for (int gi = 1; gi <= 9; ++gi) {
        const double g = gi / 10.0;
        double prev = 1e300;
        for (std::size_t depth = 1; depth <= 50; ++depth) {
            const double bare = chain_gradient({depth, g, false, 1.0});
            expect(bare <= g, "criterion 4: no-skip value above g");
            expect(bare < prev, "criterion 4: no-skip value not strictly decreasing");
            prev = bare;
            expect(chain_gradient({depth, g, true, 1.0}) >= 1.0,
                   "criterion 4: with-skip value below 1");
        }
    }
}

// ---------------------------------------------------------------- criterion 5

void criterion_case_analysis() {
    const CaseReport amplify = case_analysis(0.5, 1e-8);
    expect(amplify.scale_factor > 1.0, "criterion 5: sigma=0.5 not amplifying");
    expect(std::abs(amplify.scale_factor - 2.0) < 1e-7, "criterion 5: sigma=0.5 scale not ~2");
    expect(amplify.regime == Regime::Amplifying, "criterion 5: wrong regime for sigma=0.5");

    const CaseReport attenuate = case_analysis(2.0, 1e-8);
    expect(attenuate.scale_factor < 1.0, "criterion 5: sigma=2 not attenuating");
    expect(std::abs(attenuate.scale_factor - 0.5) < 1e-8, "criterion 5: sigma=2 scale not ~0.5");
    expect(attenuate.regime == Regime::Attenuating, "criterion 5: wrong regime for sigma=2");

    const CaseReport boundary = case_analysis(1.0 - 1e-8, 1e-8);
    expect(boundary.scale_factor == 1.0, "criterion 5: boundary scale not exactly 1");
    expect(boundary.regime == Regime::Neutral, "criterion 5: boundary regime not neutral");
}

// ---------------------------------------------------------------- criterion 6

void criterion_adam_algorithm() {
    OptimizerState fresh;
    fresh.kind = OptimizerKind::Adam;
    fresh.learning_rate = 0.001;

    Rng rng(66);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor g({4});
        for (std::size_t i = 0; i < 4; ++i) {
            g[i] = rng.normal(0.0, std::pow(10.0, rng.uniform(-8.0, 8.0)));
        }
        expect(adam_update_magnitude_bound_check(fresh, g),
               "criterion 6: first-step bound violated");
    }

    // bias-correction identity through the real step() path
    {
        auto fc = std::make_unique<FullyConnected>(1, 2, false);
        std::vector<std::unique_ptr<Layer>> layers;
        layers.push_back(std::move(fc));
        Network net(std::move(layers), Loss::Mse);
        OptimizerState opt = fresh;
        TransformPipeline empty;
        const Tensor g({1, 2}, {0.625, -2.5});
        for (int t = 1; t <= 100; ++t) {
            std::vector<ParamGrad> grads;
            auto slots = net.param_slots();
            grads.push_back({slots[0].name, *slots[0].value, g});
            step(opt, empty, net, grads);
            const double bc1 = 1.0 - std::pow(opt.beta1, t);
            for (std::size_t k = 0; k < 2; ++k) {
                const double m_hat = opt.m.at("layer0.weight")[k] / bc1;
                expect(std::abs(m_hat - g[k]) <= 1e-12,
                       "criterion 6: bias-correction identity broke at t=" + std::to_string(t));
            }
        }
    }

    // first step with ghat = [1, -1]: delta ~ [-eta, +eta] within 1e-6
    {
        auto fc = std::make_unique<FullyConnected>(1, 2, false);
        std::vector<std::unique_ptr<Layer>> layers;
        layers.push_back(std::move(fc));
        Network net(std::move(layers), Loss::Mse);
        OptimizerState opt = fresh;
        TransformPipeline empty;
        std::vector<ParamGrad> grads;
        auto slots = net.param_slots();
        grads.push_back({slots[0].name, *slots[0].value, Tensor({1, 2}, {1.0, -1.0})});
        step(opt, empty, net, grads);
        expect(std::abs((*slots[0].value)[0] + 0.001) <= 1e-6,
               "criterion 6: first-step delta[0] not ~ -0.001");
        expect(std::abs((*slots[0].value)[1] - 0.001) <= 1e-6,
               "criterion 6: first-step delta[1] not ~ +0.001");
    }
}

// ---------------------------------------------------------------- criterion 7

namespace oracle {

// independent full double loop, no early exits
double hausdorff_naive(const PointSet& p, const PointSet& g) {
    auto directed = [](const PointSet& from, const PointSet& to) {
        std::int64_t worst = 0;
        for (const auto& a : from.points) {
            std::int64_t nearest = -1;
            for (const auto& b : to.points) {
                const std::int64_t dr = a.first - b.first;
                const std::int64_t dc = a.second - b.second;
                const std::int64_t d = dr * dr + dc * dc;
                if (nearest < 0 || d < nearest) nearest = d;
            }
            if (nearest > worst) worst = nearest;
        }
        return worst;
    };
    return std::sqrt(static_cast<double>(std::max(directed(p, g), directed(g, p))));
}

}  // namespace oracle

void criterion_hausdorff_oracle() {
    Rng rng(77);
    auto random_points = [&rng](std::size_t rows, std::size_t cols, double density) {
        while (true) {
            Tensor mask({rows, cols});
            for (std::size_t i = 0; i < mask.numel(); ++i) {
                mask[i] = rng.uniform() < density ? 1.0 : 0.0;
            }
            PointSet ps = mask_to_pointset(mask);
            if (!ps.empty()) return ps;
        }
    };

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 1 + rng.below(32);
        const std::size_t cols = 1 + rng.below(32);
        const double density = 0.02 + 0.4 * rng.uniform();
        const PointSet p = random_points(rows, cols, density);
        const PointSet g = random_points(rows, cols, density);
        const double shipped = hausdorff(p, g);
        expect(shipped == oracle::hausdorff_naive(p, g),
               "criterion 7: oracle mismatch at trial " + std::to_string(trial));
        expect(shipped == hausdorff(g, p), "criterion 7: symmetry broke");
        expect(hausdorff(p, p) == 0.0, "criterion 7: H(P,P) != 0");
        const bool equal_sets = p.points == g.points;
        expect((shipped == 0.0) == equal_sets, "criterion 7: zero-iff-equal broke");
    }

    Rng crng(78);
    for (int trial = 0; trial < 300; ++trial) {
        const ConfusionCounts c{crng.below(100), crng.below(100), crng.below(100),
                                crng.below(100)};
        expect(std::abs(f1(c) - tversky(c, 0.5, 0.5)) <= 1e-12,
               "criterion 7: f1 != tversky(0.5, 0.5)");
    }
}

// ---------------------------------------------------------------- criterion 8

void criterion_desk_scale_training() {
    const std::string dir = (work_dir() / "desk_scale").string();
    RunConfig config = load_config("presets/two_moons_znorm.json");
    const TrainResult znorm_run = run_train(config, dir, true);
    expect(!znorm_run.diverged, "criterion 8: znorm run diverged");
    for (const auto& rec : znorm_run.records) {
        expect(rec.metrics.count("diverged") == 0, "criterion 8: divergence flag present");
    }

    double final_train_accuracy = 0.0;
    for (auto it = znorm_run.records.rbegin(); it != znorm_run.records.rend(); ++it) {
        if (it->split == "train") {
            final_train_accuracy = it->metrics.at("accuracy");
            break;
        }
    }
    expect(final_train_accuracy >= 0.95,
           "criterion 8: train accuracy " + std::to_string(final_train_accuracy) + " < 0.95");

    // identical-seed baseline also completes
    RunConfig baseline = config;
    baseline.pipeline.transforms.clear();
    baseline.output.log_path = "two_moons_baseline.jsonl";
    baseline.output.checkpoint_path = "two_moons_baseline.ckpt";
    const TrainResult base_run = run_train(baseline, dir, true);
    expect(base_run.records.size() >= 1, "criterion 8: baseline run produced no records");
    expect(!base_run.diverged, "criterion 8: baseline run diverged");
}

// ---------------------------------------------------------------- criterion 9

void criterion_compare_cifar_subset() {
    const auto dir = work_dir() / "cifar_compare";
    std::filesystem::create_directories(dir);
    const std::string data_path = (dir / "synthetic_cifar10.bin").string();
    if (!std::filesystem::exists(data_path)) {
        write_synthetic_cifar(data_path, 5000, 90210);
    }

    RunConfig config = load_config("presets/cifar10_subset_compare.json");
    config.dataset.path = data_path;

    const auto rows = run_compare(config, compare_method_tokens(), dir.string(), true);
    expect(rows.size() == 6, "criterion 9: expected six method rows");
    write_compare_reports(rows, dir.string());
    expect(std::filesystem::exists(dir / "compare_report.txt"),
           "criterion 9: table report missing");

    const std::string table = format_compare_table(rows);
    for (const char* column : {"Methods", "Test Accuracy", "Train Loss"}) {
        expect(table.find(column) != std::string::npos,
               std::string("criterion 9: column missing: ") + column);
    }

    for (const auto& row : rows) {
        expect(!row.diverged, "criterion 9: " + row.method + " diverged");
        const auto& losses = row.epoch_train_loss;
        expect(losses.size() >= 2, "criterion 9: " + row.method + " too few epochs");
        if (losses.size() < 2) continue;
        const std::size_t window = std::min<std::size_t>(5, losses.size());
        double smoothed = 0.0;
        for (std::size_t i = losses.size() - window; i < losses.size(); ++i) {
            smoothed += losses[i];
        }
        smoothed /= static_cast<double>(window);
        expect(smoothed < losses.front(),
               "criterion 9: " + row.method + " smoothed final loss " +
                   std::to_string(smoothed) + " >= epoch-1 loss " +
                   std::to_string(losses.front()));
        // no ordering between methods is asserted
    }
}

// --------------------------------------------------------------- criterion 10

void criterion_determinism() {
    const std::string dir_a = (work_dir() / "det_a").string();
    const std::string dir_b = (work_dir() / "det_b").string();
    RunConfig config = load_config("presets/two_moons_znorm.json");
    config.schedule.epochs = 20;  // trimmed re-run of the preset
    const TrainResult a = run_train(config, dir_a, true);
    const TrainResult b = run_train(config, dir_b, true);

    std::ifstream ca(a.checkpoint_path, std::ios::binary);
    std::ifstream cb(b.checkpoint_path, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(ca)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(cb)), {});
    expect(!bytes_a.empty() && bytes_a == bytes_b,
           "criterion 10: checkpoints differ between runs");

    std::ifstream la(a.log_path), lb(b.log_path);
    std::string line_a, line_b;
    std::size_t lines = 0;
    while (std::getline(la, line_a) && std::getline(lb, line_b)) {
        auto ja = nlohmann::json::parse(line_a);
        auto jb = nlohmann::json::parse(line_b);
        ja.erase("wall_time");
        jb.erase("wall_time");
        expect(ja.dump() == jb.dump(), "criterion 10: log line " + std::to_string(lines) +
                                           " differs (ignoring wall_time)");
        ++lines;
    }
    expect(lines == a.records.size(), "criterion 10: log line count mismatch");
}

}  // namespace

int main() {
    // presets resolve relative to the repository root
    if (!std::filesystem::exists("presets") &&
        std::filesystem::exists("../presets")) {
        std::filesystem::current_path("..");
    }
    if (!std::filesystem::exists("presets") &&
        std::filesystem::exists("../../presets")) {
        std::filesystem::current_path("../..");
    }

    const std::vector<Criterion> criteria = {
        {1, "znorm statistics property (1000 random tensors)", criterion_znorm_statistics, 5.0},
        {2, "constant and single-element degenerate cases", criterion_degenerate_cases, 0.0},
        {3, "gradient exactness versus finite differences", criterion_gradient_exactness, 60.0},
        {4, "skip-connection chain bound and autodiff match", criterion_skip_bound, 0.0},
        {5, "scale-factor case analysis", criterion_case_analysis, 0.0},
        {6, "Adam first-step bound and bias correction", criterion_adam_algorithm, 0.0},
        {7, "Hausdorff oracle equivalence and f1/tversky identity", criterion_hausdorff_oracle,
         0.0},
        {8, "desk-scale two-moons training with znorm", criterion_desk_scale_training, 120.0},
        {9, "six-method comparison on a synthetic CIFAR-10-format subset",
         criterion_compare_cifar_subset, 0.0},
        {10, "bitwise determinism of checkpoints and logs", criterion_determinism, 0.0},
    };

    int failed_criteria = 0;
    for (const Criterion& c : criteria) {
        const int before = failures;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body();
        } catch (const std::exception& e) {
            expect(false, std::string("criterion threw: ") + e.what());
        }
        const double elapsed = seconds_since(start);
        if (c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
            expect(false, "time limit exceeded: " + std::to_string(elapsed) + "s > " +
                              std::to_string(c.time_limit_s) + "s");
        }
        const bool ok = failures == before;
        if (!ok) ++failed_criteria;
        std::printf("%s  [%2d] %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.title, elapsed);
        for (std::size_t i = before; i < messages.size(); ++i) {
            std::printf("        %s\n", messages[i].c_str());
        }
    }

    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed_criteria,
                criteria.size());
    return failed_criteria == 0 ? 0 : 1;
}
