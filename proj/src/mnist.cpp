#include "lsrl/mnist.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lsrl/errors.hpp"

namespace lsrl {

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;
constexpr std::size_t kRows = 28, kCols = 28, kPixels = kRows * kCols;

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    if (has_suffix(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw DataError("cannot open " + path);
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
        const bool bad = n < 0;
        gzclose(f);
        if (bad) throw DataError("gzip read error in " + path);
        return out;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t off) {
    return (std::uint32_t(buf[off]) << 24) | (std::uint32_t(buf[off + 1]) << 16) |
           (std::uint32_t(buf[off + 2]) << 8) | std::uint32_t(buf[off + 3]);
}

void write_be32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(std::uint8_t(v >> 24));
    buf.push_back(std::uint8_t(v >> 16));
    buf.push_back(std::uint8_t(v >> 8));
    buf.push_back(std::uint8_t(v));
}

}  // namespace

MnistSet load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto ibuf = read_file(images_path);
    if (ibuf.size() < 16) throw DataError("truncated image file (no header): " + images_path);
    const std::uint32_t imagic = read_be32(ibuf, 0);
    if (imagic != kImageMagic) {
        throw DataError("bad image magic: expected 2051, got " + std::to_string(imagic) + " in " +
                        images_path);
    }
    const std::size_t count = read_be32(ibuf, 4);
    const std::uint32_t rows = read_be32(ibuf, 8), cols = read_be32(ibuf, 12);
    if (rows != kRows || cols != kCols) {
        throw DataError("unexpected image size: " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " in " + images_path);
    }
    if (ibuf.size() != 16 + count * kPixels) {
        throw DataError("truncated image file: expected " + std::to_string(16 + count * kPixels) +
                        " bytes, got " + std::to_string(ibuf.size()) + " in " + images_path);
    }

    const auto lbuf = read_file(labels_path);
    if (lbuf.size() < 8) throw DataError("truncated label file (no header): " + labels_path);
    const std::uint32_t lmagic = read_be32(lbuf, 0);
    if (lmagic != kLabelMagic) {
        throw DataError("bad label magic: expected 2049, got " + std::to_string(lmagic) + " in " +
                        labels_path);
    }
    const std::size_t lcount = read_be32(lbuf, 4);
    if (lcount != count) {
        throw DataError("count mismatch: " + std::to_string(count) + " images vs " +
                        std::to_string(lcount) + " labels");
    }
    if (lbuf.size() != 8 + lcount) {
        throw DataError("truncated label file: expected " + std::to_string(8 + lcount) +
                        " bytes, got " + std::to_string(lbuf.size()) + " in " + labels_path);
    }

    MnistSet set;
    std::vector<double> pixels(count * kPixels);
    for (std::size_t i = 0; i < count * kPixels; ++i) {
        pixels[i] = static_cast<double>(ibuf[16 + i]) / 255.0;
    }
    set.images = Tensor::from_data({count, kPixels}, std::move(pixels));
    set.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t l = lbuf[8 + i];
        if (l > 9) throw DataError("label out of range: " + std::to_string(l) + " at index " +
                                   std::to_string(i));
        set.labels[i] = l;
    }
    return set;
}

std::vector<std::uint8_t> to_idx_images(const MnistSet& set) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + set.size() * kPixels);
    write_be32(out, kImageMagic);
    write_be32(out, static_cast<std::uint32_t>(set.size()));
    write_be32(out, kRows);
    write_be32(out, kCols);
    for (double p : set.images.data()) {
        const long b = std::lround(std::clamp(p, 0.0, 1.0) * 255.0);
        out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
}

std::vector<std::uint8_t> to_idx_labels(const MnistSet& set) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + set.size());
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(set.size()));
    for (int l : set.labels) out.push_back(static_cast<std::uint8_t>(l));
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            std::size_t n_train,
                                                                            std::uint64_t seed) {
    Rng rng(seed, "train-val-split");
    auto order = rng.shuffled_indices(n);
    std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> val(order.begin() + n_train, order.end());
    return {std::move(train), std::move(val)};
}

std::pair<MnistSet, MnistSet> split_train_val(const MnistSet& full, std::uint64_t seed) {
    if (full.size() != 60000) {
        throw DataError("split_train_val expects the 60,000-row training set, got " +
                        std::to_string(full.size()));
    }
    auto [train_idx, val_idx] = split_indices(60000, 48000, seed);
    return {subset(full, train_idx, "train"), subset(full, val_idx, "val")};
}

MnistSet subset(const MnistSet& set, const std::vector<std::size_t>& indices,
                const std::string& split_name) {
    MnistSet out;
    std::vector<double> pixels(indices.size() * kPixels);
    out.labels.resize(indices.size());
    const auto& src = set.images.data();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::memcpy(pixels.data() + i * kPixels, src.data() + indices[i] * kPixels,
                    kPixels * sizeof(double));
        out.labels[i] = set.labels[indices[i]];
    }
    out.images = Tensor::from_data({indices.size(), kPixels}, std::move(pixels));
    out.split = split_name;
    return out;
}

Tensor add_gaussian_noise(const Tensor& images, double sigma, Rng& rng) {
    if (sigma < 0) throw StateError("negative noise sigma");
    if (sigma == 0.0) return images;
    std::vector<double> out(images.size());
    const auto& src = images.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(src[i] + rng.normal(0.0, sigma), 0.0, 1.0);
    }
    return Tensor::from_data(images.shape(), std::move(out));
}

Batches::Batches(const MnistSet& set, std::size_t batch_size, Rng& rng)
    : set_(set), batch_size_(batch_size), order_(rng.shuffled_indices(set.size())) {
    if (batch_size == 0) throw StateError("batch_size must be >= 1");
}

std::size_t Batches::batch_count() const {
    return (order_.size() + batch_size_ - 1) / batch_size_;
}

bool Batches::next(Tensor& images, std::vector<int>& labels) {
    if (cursor_ >= order_.size()) return false;
    const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
    std::vector<std::size_t> idx(order_.begin() + cursor_, order_.begin() + cursor_ + n);
    cursor_ += n;
    MnistSet b = subset(set_, idx, set_.split);
    images = b.images;
    labels = std::move(b.labels);
    return true;
}

}  // namespace lsrl
