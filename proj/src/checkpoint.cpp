#include "gradlab/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace gradlab {

namespace {

constexpr char kMagic[4] = {'G', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw CheckpointError(path + ": truncated checkpoint");
    return value;
}

void write_tensor_data(std::ofstream& out, const Tensor& t) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * sizeof(double)));
}

void read_tensor_data(std::ifstream& in, Tensor& t, const std::string& path) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!in) throw CheckpointError(path + ": truncated parameter data");
}

void write_layer(std::ofstream& out, const Layer& layer) {
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(layer.kind()));
    switch (layer.kind()) {
        case LayerKind::FullyConnected: {
            const auto& fc = static_cast<const FullyConnected&>(layer);
            write_pod<std::uint64_t>(out, fc.out_dim());
            write_pod<std::uint64_t>(out, fc.in_dim());
            write_pod<std::uint8_t>(out, fc.has_bias() ? 1 : 0);
            write_tensor_data(out, fc.weight);
            if (fc.has_bias()) write_tensor_data(out, fc.bias);
            break;
        }
        case LayerKind::Conv2D: {
            const auto& conv = static_cast<const Conv2D&>(layer);
            write_pod<std::uint64_t>(out, conv.out_ch());
            write_pod<std::uint64_t>(out, conv.in_ch());
            write_pod<std::uint64_t>(out, conv.kernel_h());
            write_pod<std::uint64_t>(out, conv.kernel_w());
            write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(conv.stride()));
            write_pod<std::uint8_t>(out, conv.padding() == Padding::Same ? 1 : 0);
            write_pod<std::uint8_t>(out, conv.has_bias() ? 1 : 0);
            write_tensor_data(out, conv.weight);
            if (conv.has_bias()) write_tensor_data(out, conv.bias);
            break;
        }
        case LayerKind::ReLU:
        case LayerKind::Sigmoid:
        case LayerKind::GlobalAveragePool:
            break;
        case LayerKind::ResidualBlock: {
            const auto& block = static_cast<const ResidualBlock&>(layer);
            write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(block.inner().size()));
            for (const auto& inner : block.inner()) write_layer(out, *inner);
            break;
        }
    }
}

std::unique_ptr<Layer> read_layer(std::ifstream& in, const std::string& path) {
    const auto tag = read_pod<std::uint8_t>(in, path);
    switch (static_cast<LayerKind>(tag)) {
        case LayerKind::FullyConnected: {
            const auto out_dim = read_pod<std::uint64_t>(in, path);
            const auto in_dim = read_pod<std::uint64_t>(in, path);
            const bool with_bias = read_pod<std::uint8_t>(in, path) != 0;
            auto fc = std::make_unique<FullyConnected>(out_dim, in_dim, with_bias);
            read_tensor_data(in, fc->weight, path);
            if (with_bias) read_tensor_data(in, fc->bias, path);
            return fc;
        }
        case LayerKind::Conv2D: {
            const auto co = read_pod<std::uint64_t>(in, path);
            const auto ci = read_pod<std::uint64_t>(in, path);
            const auto k1 = read_pod<std::uint64_t>(in, path);
            const auto k2 = read_pod<std::uint64_t>(in, path);
            const auto stride = read_pod<std::uint8_t>(in, path);
            const Padding padding =
                read_pod<std::uint8_t>(in, path) != 0 ? Padding::Same : Padding::Valid;
            const bool with_bias = read_pod<std::uint8_t>(in, path) != 0;
            auto conv = std::make_unique<Conv2D>(co, ci, k1, k2, stride, padding, with_bias);
            read_tensor_data(in, conv->weight, path);
            if (with_bias) read_tensor_data(in, conv->bias, path);
            return conv;
        }
        case LayerKind::ReLU:
            return std::make_unique<ReLU>();
        case LayerKind::Sigmoid:
            return std::make_unique<Sigmoid>();
        case LayerKind::GlobalAveragePool:
            return std::make_unique<GlobalAveragePool>();
        case LayerKind::ResidualBlock: {
            const auto count = read_pod<std::uint32_t>(in, path);
            std::vector<std::unique_ptr<Layer>> inner;
            inner.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) inner.push_back(read_layer(in, path));
            return std::make_unique<ResidualBlock>(std::move(inner));
        }
    }
    throw CheckpointError(path + ": unknown layer tag " + std::to_string(tag));
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kVersion);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(net.loss()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) write_layer(out, *layer);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw CheckpointError(path + ": not a network checkpoint (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw CheckpointError(path + ": unsupported checkpoint version " +
                              std::to_string(version));
    }
    const auto loss = static_cast<Loss>(read_pod<std::uint8_t>(in, path));
    const auto count = read_pod<std::uint32_t>(in, path);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) layers.push_back(read_layer(in, path));
    return Network(std::move(layers), loss);
}

}  // namespace gradlab
