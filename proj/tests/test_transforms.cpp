#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradlab/rng.hpp"
#include "gradlab/transforms.hpp"

using namespace gradlab;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double spread = 1.0, double offset = 0.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = offset + spread * rng.normal();
    return t;
}

// three weight tensors (fc, conv, fc), one bias, one single-element tensor
std::vector<ParamGrad> fake_grads(Rng& rng) {
    std::vector<ParamGrad> grads;
    grads.push_back({"layer0.weight", Tensor::zeros({4, 3}), random_tensor({4, 3}, rng)});
    grads.push_back({"layer0.bias", Tensor::zeros({4}), random_tensor({4}, rng)});
    grads.push_back({"layer1.weight", Tensor::zeros({2, 2, 3, 3}), random_tensor({2, 2, 3, 3}, rng)});
    grads.push_back({"layer2.weight", Tensor::zeros({2, 4}), random_tensor({2, 4}, rng)});
    grads.push_back({"layer2.scalar", Tensor::zeros({1, 1}), random_tensor({1, 1}, rng)});
    return grads;
}

}  // namespace

TEST_CASE("znorm hand values") {
    const Tensor g({4}, {0, 2, 4, 6});
    const Tensor out = znorm(g, 1e-8);
    const double expect[] = {-1.3416407, -0.4472136, 0.4472136, 1.3416407};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-7));
    }

    const Tensor pair({2}, {1, -1});
    const Tensor out2 = znorm(pair, 1e-8);
    CHECK(out2[0] == doctest::Approx(1.0 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(out2[1] == doctest::Approx(-1.0 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("znorm of a constant tensor is exactly zero") {
    for (double c : {5.0, 0.1, -7.3e-5, 0.0}) {
        const Tensor g = Tensor::full({3}, c);
        const Tensor out = znorm(g, 1e-8);
        for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == 0.0);
    }
}

TEST_CASE("znorm output statistics") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor g = random_tensor({8, 8}, rng, rng.uniform(0.05, 3.0), rng.uniform(-2, 2));
        const TensorStats in = stats(g);
        const Tensor out = znorm(g, 1e-8);
        const TensorStats post = stats(out);
        CHECK(std::abs(post.mean) < 1e-9);
        CHECK(post.std == doctest::Approx(in.std / (in.std + 1e-8)).epsilon(1e-9));
        // sigma >= 1e-2 keeps the output std inside (1 - 1e-6, 1)
        if (in.std >= 1e-2) {
            CHECK(post.std > 1.0 - 1e-6);
            CHECK(post.std < 1.0);
        }
    }
}

TEST_CASE("znorm direction is scale invariant up to the eps correction") {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor g = random_tensor({6, 5}, rng, 1.0);
        if (stats(g).std < 0.1) continue;
        const Tensor base = znorm(g, 1e-8);
        for (double a : {0.5, 2.0, 10.0}) {
            const Tensor scaled = znorm(scale(g, a), 1e-8);
            for (std::size_t i = 0; i < base.numel(); ++i) {
                CHECK(std::abs(scaled[i] - base[i]) <= 1e-6);
            }
        }
    }
}

TEST_CASE("znorm is idempotence-adjacent") {
    Rng rng(55);
    const Tensor g = random_tensor({10, 10}, rng, 2.0, 0.3);
    const Tensor once = znorm(g, 1e-8);
    const Tensor twice = znorm(once, 1e-8);
    CHECK(std::abs(stats(twice).std - stats(once).std) <= 2e-8);
    std::size_t argmax1 = 0, argmax2 = 0, argmin1 = 0, argmin2 = 0;
    for (std::size_t i = 0; i < once.numel(); ++i) {
        if (once[i] > once[argmax1]) argmax1 = i;
        if (twice[i] > twice[argmax2]) argmax2 = i;
        if (once[i] < once[argmin1]) argmin1 = i;
        if (twice[i] < twice[argmin2]) argmin2 = i;
    }
    CHECK(argmax1 == argmax2);
    CHECK(argmin1 == argmin2);
}

TEST_CASE("scale factor regimes around sigma = 1") {
    // 1/(sigma+eps) amplifies exactly when sigma < 1 - eps.
    const double eps = 1e-8;
    CHECK(1.0 / (0.5 + eps) > 1.0);
    CHECK(1.0 / (2.0 + eps) < 1.0);
    CHECK(1.0 / ((1.0 - eps) + eps) == 1.0);
}

TEST_CASE("centralize hand values and idempotence") {
    CHECK(centralize(Tensor({3}, {1, 2, 3})).vec() == std::vector<double>{-1, 0, 1});
    CHECK(centralize(Tensor({2, 2}, {4, 0, 0, 0})).vec() == std::vector<double>{3, -1, -1, -1});

    Rng rng(5);
    const Tensor g = random_tensor({4, 4}, rng, 1.5, -0.7);
    const Tensor once = centralize(g);
    CHECK(std::abs(stats(once).mean) < 1e-12);
    CHECK(stats(once).variance == doctest::Approx(stats(g).variance).epsilon(1e-12));
    const Tensor twice = centralize(once);
    for (std::size_t i = 0; i < g.numel(); ++i) {
        CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
    }
}

TEST_CASE("clip hand values, contraction, and zero convention") {
    const Tensor g({2}, {3, 4});
    const Tensor clipped = clip(g, 1.0);
    CHECK(clipped[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(clipped[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(clip(g, 10.0).vec() == g.vec());
    CHECK(clip(Tensor::zeros({3}), 0.5).vec() == std::vector<double>{0, 0, 0});

    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor x = random_tensor({5}, rng, rng.uniform(0.1, 4.0));
        const double tau = rng.uniform(0.01, 3.0);
        const Tensor y = clip(x, tau);
        CHECK(l2_norm(y) <= std::min(l2_norm(x), tau) + 1e-12);
        // direction preserved
        if (l2_norm(x) > tau) {
            for (std::size_t i = 0; i < x.numel(); ++i) {
                CHECK(y[i] * x[i] >= 0.0);
            }
        }
    }
}

TEST_CASE("pipeline applies per tensor with the applicability rule") {
    Rng rng(17);
    std::vector<ParamGrad> grads = fake_grads(rng);
    TransformPipeline znorm_only{{make_znorm(1e-8)}};
    const auto out = znorm_only.apply(grads);

    // each of the three weight tensors is normalized independently
    for (std::size_t i : {std::size_t(0), std::size_t(2), std::size_t(3)}) {
        const TensorStats s = stats(out[i].grad);
        CHECK(std::abs(s.mean) < 1e-9);
        CHECK(s.std == doctest::Approx(1.0).epsilon(1e-4));
    }
    // bias (rank 1) and single-element tensors pass through untouched
    CHECK(out[1].grad.vec() == grads[1].grad.vec());
    CHECK(out[4].grad.vec() == grads[4].grad.vec());
    // parameter values untouched
    for (std::size_t i = 0; i < grads.size(); ++i) {
        CHECK(out[i].param.vec() == grads[i].param.vec());
    }
}

TEST_CASE("identity pipeline is bitwise a no-op") {
    Rng rng(19);
    std::vector<ParamGrad> grads = fake_grads(rng);
    TransformPipeline id{{make_identity()}};
    const auto out = id.apply(grads);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        CHECK(out[i].grad.vec() == grads[i].grad.vec());
    }
}

TEST_CASE("centralize then znorm equals znorm alone") {
    Rng rng(23);
    TransformPipeline combo{{make_centralize(), make_znorm(1e-8)}};
    TransformPipeline solo{{make_znorm(1e-8)}};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ParamGrad> grads = fake_grads(rng);
        const auto a = combo.apply(grads);
        const auto b = solo.apply(grads);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            for (std::size_t k = 0; k < a[i].grad.numel(); ++k) {
                CHECK(std::abs(a[i].grad[k] - b[i].grad[k]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("transforms preserve shape") {
    Rng rng(29);
    const Tensor g = random_tensor({2, 3, 2, 2}, rng);
    CHECK(znorm(g, 1e-8).shape() == g.shape());
    CHECK(centralize(g).shape() == g.shape());
    CHECK(clip(g, 0.1).shape() == g.shape());
}

TEST_CASE("whole-model scope pools statistics across tensors") {
    Rng rng(31);
    std::vector<ParamGrad> grads = fake_grads(rng);
    GradTransform t = make_znorm(1e-8);
    t.whole_model = true;
    TransformPipeline p{{t}};
    const auto out = p.apply(grads);

    // Pool the transformed applicable tensors: jointly standardized.
    std::vector<double> pooled;
    for (std::size_t i : {std::size_t(0), std::size_t(2), std::size_t(3)}) {
        pooled.insert(pooled.end(), out[i].grad.vec().begin(), out[i].grad.vec().end());
    }
    const std::size_t pooled_size = pooled.size();
    const TensorStats s = stats(Tensor({pooled_size}, std::move(pooled)));
    CHECK(std::abs(s.mean) < 1e-9);
    CHECK(s.std == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(out[1].grad.vec() == grads[1].grad.vec());
}

TEST_CASE("invalid transform parameters are rejected") {
    const Tensor g({2}, {1, 2});
    CHECK_THROWS_AS(znorm(g, 0.0), InvalidInput);
    CHECK_THROWS_AS(clip(g, -1.0), InvalidInput);
    CHECK_THROWS_AS(znorm(Tensor({0}), 1e-8), InvalidInput);
}
