#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lsrl/rng.hpp"
#include "lsrl/tensor.hpp"

namespace lsrl {

// One split of MNIST: images as [N x 784] rows in [0,1], labels 0..9.
struct MnistSet {
    Tensor images;
    std::vector<int> labels;
    std::string split = "full";

    std::size_t size() const { return labels.size(); }
};

// Parses a pair of IDX files (raw, or gzip when the path ends in ".gz").
// Validates the big-endian headers: image magic 2051, label magic 2049,
// equal counts, 28x28 pixels. Pixel bytes are scaled by 1/255.
MnistSet load_idx(const std::string& images_path, const std::string& labels_path);

// Serialize back to IDX bytes; loading then re-serializing an untouched set
// reproduces the original (decompressed) files byte for byte.
std::vector<std::uint8_t> to_idx_images(const MnistSet& set);
std::vector<std::uint8_t> to_idx_labels(const MnistSet& set);

// Deterministic, label-agnostic 80/20 partition of the 60,000-row training
// file, keyed by seed.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            std::size_t n_train,
                                                                            std::uint64_t seed);
std::pair<MnistSet, MnistSet> split_train_val(const MnistSet& full, std::uint64_t seed);

MnistSet subset(const MnistSet& set, const std::vector<std::size_t>& indices,
                const std::string& split_name);

// Per-pixel N(0, sigma) noise, clamped back into [0,1]. sigma = 0 returns
// the input unchanged without consuming randomness.
Tensor add_gaussian_noise(const Tensor& images, double sigma, Rng& rng);

// One epoch of batches under a fresh deterministic shuffle; the final short
// batch is kept.
class Batches {
public:
    Batches(const MnistSet& set, std::size_t batch_size, Rng& rng);

    bool next(Tensor& images, std::vector<int>& labels);
    std::size_t batch_count() const;

private:
    const MnistSet& set_;
    std::size_t batch_size_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace lsrl
