#include "gradlab/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "gradlab/rng.hpp"

namespace gradlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void fill_identity_split(Dataset& ds) {
    ds.train_idx.resize(ds.size());
    std::iota(ds.train_idx.begin(), ds.train_idx.end(), 0);
    ds.test_idx.clear();
}

}  // namespace

Dataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("gen_two_moons: n must be >= 2");
    Rng rng(seed);
    Dataset ds;
    ds.seed = static_cast<std::int64_t>(seed);
    ds.inputs = Tensor({n, 2});
    ds.targets = Tensor({n});
    const std::size_t n0 = (n + 1) / 2;  // class 0 gets the extra point on odd n
    const std::size_t n1 = n - n0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % 2;
        const std::size_t j = i / 2;
        const std::size_t per_class = cls == 0 ? n0 : n1;
        const double t = per_class > 1
                             ? kPi * static_cast<double>(j) / static_cast<double>(per_class - 1)
                             : 0.0;
        double x, y;
        if (cls == 0) {
            x = std::cos(t);
            y = std::sin(t);
        } else {
            x = 1.0 - std::cos(t);
            y = 0.5 - std::sin(t);
        }
        ds.inputs[i * 2 + 0] = x + noise_std * rng.normal();
        ds.inputs[i * 2 + 1] = y + noise_std * rng.normal();
        ds.targets[i] = static_cast<double>(cls);
    }
    fill_identity_split(ds);
    return ds;
}

Dataset gen_blobs(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("gen_blobs: n must be >= 2");
    if (k < 1) throw InvalidInput("gen_blobs: k must be >= 1");
    Rng rng(seed);
    Dataset ds;
    ds.seed = static_cast<std::int64_t>(seed);
    ds.inputs = Tensor({n, 2});
    ds.targets = Tensor({n});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % k;
        const double angle = 2.0 * kPi * static_cast<double>(cls) / static_cast<double>(k);
        ds.inputs[i * 2 + 0] = 5.0 * std::cos(angle) + rng.normal();
        ds.inputs[i * 2 + 1] = 5.0 * std::sin(angle) + rng.normal();
        ds.targets[i] = static_cast<double>(cls);
    }
    fill_identity_split(ds);
    return ds;
}

Dataset gen_blob_masks(std::size_t n, std::size_t size, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("gen_blob_masks: n must be >= 2");
    if (size < 6) throw InvalidInput("gen_blob_masks: size must be >= 6");
    Rng rng(seed);
    Dataset ds;
    ds.seed = static_cast<std::int64_t>(seed);
    ds.inputs = Tensor({n, 1, size, size});
    ds.targets = Tensor({n, size, size});
    const double s = static_cast<double>(size);
    for (std::size_t i = 0; i < n; ++i) {
        // Disk strictly inside the frame: both classes always present.
        const double radius = rng.uniform(std::max(1.0, s / 6.0), s / 4.0);
        const double cr = rng.uniform(radius + 1.0, s - radius - 1.0);
        const double cc = rng.uniform(radius + 1.0, s - radius - 1.0);
        for (std::size_t r = 0; r < size; ++r) {
            for (std::size_t c = 0; c < size; ++c) {
                const double dr = static_cast<double>(r) - cr;
                const double dc = static_cast<double>(c) - cc;
                const bool inside = dr * dr + dc * dc <= radius * radius;
                ds.targets[(i * size + r) * size + c] = inside ? 1.0 : 0.0;
                ds.inputs[(i * size + r) * size + c] =
                    (inside ? 1.0 : 0.0) + 0.1 * rng.normal();
            }
        }
    }
    fill_identity_split(ds);
    return ds;
}

Dataset read_cifar10_binary(const std::string& path, std::size_t limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    constexpr std::size_t kRecord = 3073;  // 1 label byte + 3 * 1024 pixels
    if (bytes.size() % kRecord != 0) {
        throw DataFormatError(path + ": length " + std::to_string(bytes.size()) +
                              " is not a multiple of the 3073-byte record size");
    }
    std::size_t n = bytes.size() / kRecord;
    if (limit > 0) n = std::min(n, limit);

    Dataset ds;
    ds.inputs = Tensor({n, 3, 32, 32});
    ds.targets = Tensor({n});
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + i * kRecord;
        if (rec[0] > 9) {
            throw DataFormatError(path + ": record " + std::to_string(i) + " has label " +
                                  std::to_string(static_cast<int>(rec[0])) + " > 9");
        }
        ds.targets[i] = static_cast<double>(rec[0]);
        for (std::size_t p = 0; p < 3072; ++p) {
            ds.inputs[i * 3072 + p] = static_cast<double>(rec[1 + p]) / 255.0;
        }
    }
    fill_identity_split(ds);
    return ds;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    // Trailing whitespace is fine; anything else is not a number.
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (cell.empty() || used != cell.size()) {
        throw DataFormatError("csv: non-numeric cell '" + cell + "' at row " +
                              std::to_string(row) + ", column " + std::to_string(col));
    }
    return value;
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataFormatError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataFormatError(path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_fields(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw DataFormatError(path + ": label column '" + label_column + "' not found");
    }

    std::vector<double> features;
    std::vector<double> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataFormatError(path + ": row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const double v = parse_cell(fields[c], row, c);
            if (c == label_idx) labels.push_back(v);
            else features.push_back(v);
        }
    }

    Dataset ds;
    const std::size_t n = labels.size();
    const std::size_t f = header.size() - 1;
    ds.inputs = Tensor({n, f}, std::move(features));
    ds.targets = Tensor({n}, std::move(labels));
    fill_identity_split(ds);
    return ds;
}

void split_dataset(Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (train_fraction < 0.0 || train_fraction > 1.0) {
        throw InvalidInput("split_dataset: train_fraction must lie in [0, 1]");
    }
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(order, rng);
    const std::size_t cut =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ds.size())));
    ds.train_idx.assign(order.begin(), order.begin() + cut);
    ds.test_idx.assign(order.begin() + cut, order.end());
}

// ------------------------------------------------- dataset container (GLDS)

namespace {

constexpr char kMagic[4] = {'G', 'L', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw DataFormatError(path + ": truncated container");
    return value;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) write_pod<std::uint64_t>(out, e);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in, const std::string& path) {
    const auto rank = read_pod<std::uint32_t>(in, path);
    if (rank > 4) throw DataFormatError(path + ": tensor rank " + std::to_string(rank) + " > 4");
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
        e = static_cast<std::size_t>(read_pod<std::uint64_t>(in, path));
        n *= e;
    }
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DataFormatError(path + ": truncated tensor data");
    return Tensor(std::move(shape), std::move(data));
}

void write_indices(std::ofstream& out, const std::vector<std::size_t>& idx) {
    write_pod<std::uint64_t>(out, idx.size());
    for (std::size_t i : idx) write_pod<std::uint64_t>(out, i);
}

std::vector<std::size_t> read_indices(std::ifstream& in, const std::string& path) {
    const auto count = read_pod<std::uint64_t>(in, path);
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = static_cast<std::size_t>(read_pod<std::uint64_t>(in, path));
    return idx;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kVersion);
    write_pod<std::int64_t>(out, ds.seed);
    write_tensor(out, ds.inputs);
    write_tensor(out, ds.targets);
    write_indices(out, ds.train_idx);
    write_indices(out, ds.test_idx);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataFormatError(path + ": not a dataset container (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw DataFormatError(path + ": unsupported container version " +
                              std::to_string(version));
    }
    Dataset ds;
    ds.seed = read_pod<std::int64_t>(in, path);
    ds.inputs = read_tensor(in, path);
    ds.targets = read_tensor(in, path);
    ds.train_idx = read_indices(in, path);
    ds.test_idx = read_indices(in, path);
    return ds;
}

}  // namespace gradlab
