#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gradlab/checkpoint.hpp"
#include "gradlab/rng.hpp"

using namespace gradlab;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void check_equal_networks(Network& a, Network& b) {
    auto sa = a.param_slots();
    auto sb = b.param_slots();
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i].name == sb[i].name);
        CHECK(sa[i].value->shape() == sb[i].value->shape());
        CHECK(sa[i].value->vec() == sb[i].value->vec());  // bitwise
    }
    CHECK(a.loss() == b.loss());
}

}  // namespace

TEST_CASE("residual MLP round-trips bitwise") {
    Network net = make_residual_mlp(8, 3, 2, 2, 321);
    const std::string path = temp_path("gradlab_ckpt_mlp.bin");
    save_network(net, path);
    Network loaded = load_network(path);
    check_equal_networks(net, loaded);
    std::remove(path.c_str());
}

TEST_CASE("conv net with pooling round-trips and still runs") {
    Network net = make_tiny_resnet(4, 2, 10, 11);
    const std::string path = temp_path("gradlab_ckpt_conv.bin");
    save_network(net, path);
    Network loaded = load_network(path);
    check_equal_networks(net, loaded);

    Rng rng(2);
    Tensor x({1, 3, 8, 8});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
    const Tensor ya = net.run_layers(x);
    const Tensor yb = loaded.run_layers(x);
    CHECK(ya.vec() == yb.vec());
    std::remove(path.c_str());
}

TEST_CASE("segnet with sigmoid and BCE round-trips") {
    Network net = make_tiny_segnet(3, 8);
    const std::string path = temp_path("gradlab_ckpt_seg.bin");
    save_network(net, path);
    Network loaded = load_network(path);
    check_equal_networks(net, loaded);
    std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoints are rejected with a clear error") {
    const std::string path = temp_path("gradlab_ckpt_bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a checkpoint";
    }
    CHECK_THROWS_WITH_AS(load_network(path), doctest::Contains("bad magic"),
                         std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_network(temp_path("gradlab_ckpt_missing.bin")), std::runtime_error);
}
