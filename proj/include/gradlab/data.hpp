#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradlab/tensor.hpp"

namespace gradlab {

// Thrown for malformed dataset files (truncated records, bad labels,
// ragged CSV rows).
struct DataFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// inputs: N x features or N x C x H x W; targets: N labels or N x H x W
// masks. Split indices are disjoint and cover 0..N-1.
struct Dataset {
    Tensor inputs;
    Tensor targets;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    std::int64_t seed = 0;

    std::size_t size() const { return inputs.rank() == 0 ? 0 : inputs.extent(0); }
};

// Two interleaving half-circles, class-balanced within one point.
// noise_std = 0 keeps the arcs exactly separable.
Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed);

// k unit-noise Gaussian blobs on a circle of radius 5.
Dataset gen_blobs(std::size_t n, std::size_t k, std::uint64_t seed);

// Synthetic binary segmentation: noisy disk images (N x 1 x size x size)
// with exact disk masks (N x size x size). Every mask contains both
// classes by construction.
Dataset gen_blob_masks(std::size_t n, std::size_t size, std::uint64_t seed);

// CIFAR-10 binary batch format: records of 3073 bytes, one label byte
// (0-9) followed by 3072 pixel bytes (R, G, B planes, each 32x32
// row-major). Pixels are scaled to [0, 1]. limit > 0 keeps only the first
// `limit` records.
Dataset read_cifar10_binary(const std::string& path, std::size_t limit = 0);

// Rectangular numeric CSV with a header row; the named column becomes the
// target vector, every other column a feature.
Dataset read_csv(const std::string& path, const std::string& label_column);

// Seeded shuffle split; (seed, train_fraction) fully determines
// membership. train_fraction 1 leaves the test split empty.
void split_dataset(Dataset& ds, double train_fraction, std::uint64_t seed);

// Versioned binary container (see docs/formats.md). Round-trips bitwise.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace gradlab
