#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "lsrl/errors.hpp"
#include "lsrl/mnist.hpp"

using namespace lsrl;
namespace fs = std::filesystem;

namespace {

std::string mnist_dir() {
    if (const char* env = std::getenv("LSRL_MNIST_DIR")) return env;
    return std::string(LSRL_SOURCE_DIR) + "/data";
}

bool real_data_present() {
    return fs::exists(mnist_dir() + "/train-images-idx3-ubyte.gz");
}

std::string write_temp(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return path;
}

void push_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(std::uint8_t(x >> 24));
    v.push_back(std::uint8_t(x >> 16));
    v.push_back(std::uint8_t(x >> 8));
    v.push_back(std::uint8_t(x));
}

// tiny synthetic pair: n images, pixel value = (index + pixel) % 256
std::pair<std::string, std::string> synthetic_pair(std::uint32_t n, std::uint32_t image_magic = 2051,
                                                   std::uint32_t label_magic = 2049,
                                                   std::uint32_t label_count = 0,
                                                   bool truncate_images = false) {
    if (label_count == 0) label_count = n;
    std::vector<std::uint8_t> img;
    push_be32(img, image_magic);
    push_be32(img, n);
    push_be32(img, 28);
    push_be32(img, 28);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t p = 0; p < 784; ++p) img.push_back(std::uint8_t((i + p) % 256));
    if (truncate_images) img.resize(img.size() - 10);

    std::vector<std::uint8_t> lab;
    push_be32(lab, label_magic);
    push_be32(lab, label_count);
    for (std::uint32_t i = 0; i < label_count; ++i) lab.push_back(std::uint8_t(i % 10));
    return {write_temp("lsrl_test_images_" + std::to_string(n), img),
            write_temp("lsrl_test_labels_" + std::to_string(label_count), lab)};
}

std::vector<std::uint8_t> gunzip_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    REQUIRE(f != nullptr);
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
    gzclose(f);
    return out;
}

}  // namespace

TEST_CASE("synthetic IDX parses with exact scaling and label copy") {
    auto [ipath, lpath] = synthetic_pair(5);
    MnistSet set = load_idx(ipath, lpath);
    CHECK(set.size() == 5);
    CHECK(set.labels[3] == 3);
    // pixel byte 255 -> 1.0, byte 0 -> 0.0
    CHECK(set.images.at({0, 255}) == doctest::Approx(1.0));  // (0 + 255) % 256
    CHECK(set.images.at({0, 0}) == doctest::Approx(0.0));
    CHECK(set.images.at({0, 128}) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("IDX validation errors are distinct and name the field") {
    {
        auto [i, l] = synthetic_pair(3, /*image_magic=*/2052);
        CHECK_THROWS_WITH_AS(load_idx(i, l), doctest::Contains("bad image magic"), DataError);
    }
    {
        auto [i, l] = synthetic_pair(3, 2051, /*label_magic=*/7);
        CHECK_THROWS_WITH_AS(load_idx(i, l), doctest::Contains("bad label magic"), DataError);
    }
    {
        auto [i, l] = synthetic_pair(3, 2051, 2049, /*label_count=*/4);
        CHECK_THROWS_WITH_AS(load_idx(i, l), doctest::Contains("count mismatch"), DataError);
    }
    {
        auto [i, l] = synthetic_pair(3, 2051, 2049, 3, /*truncate_images=*/true);
        CHECK_THROWS_WITH_AS(load_idx(i, l), doctest::Contains("truncated image file"), DataError);
    }
    CHECK_THROWS_AS(load_idx("/nonexistent/images", "/nonexistent/labels"), DataError);
}

TEST_CASE("IDX round-trip on synthetic data is byte exact") {
    auto [ipath, lpath] = synthetic_pair(4);
    MnistSet set = load_idx(ipath, lpath);
    const auto ibytes = to_idx_images(set);
    const auto lbytes = to_idx_labels(set);

    std::ifstream fi(ipath, std::ios::binary);
    std::vector<std::uint8_t> iorig{std::istreambuf_iterator<char>(fi), {}};
    std::ifstream fl(lpath, std::ios::binary);
    std::vector<std::uint8_t> lorig{std::istreambuf_iterator<char>(fl), {}};
    CHECK(ibytes == iorig);
    CHECK(lbytes == lorig);
}

TEST_CASE("real MNIST files validate and round-trip") {
    if (!real_data_present()) {
        MESSAGE("MNIST data not found under ", mnist_dir(), "; skipping real-file checks");
        return;
    }
    const std::string dir = mnist_dir();
    const std::string ipath = dir + "/train-images-idx3-ubyte.gz";
    const std::string lpath = dir + "/train-labels-idx1-ubyte.gz";

    // header oracle: bytes 00 00 08 03 00 00 EA 60 = magic 2051, count 60000
    const auto raw = gunzip_file(ipath);
    REQUIRE(raw.size() >= 8);
    CHECK(raw[0] == 0x00);
    CHECK(raw[1] == 0x00);
    CHECK(raw[2] == 0x08);
    CHECK(raw[3] == 0x03);
    CHECK(raw[4] == 0x00);
    CHECK(raw[5] == 0x00);
    CHECK(raw[6] == 0xEA);
    CHECK(raw[7] == 0x60);

    MnistSet train = load_idx(ipath, lpath);
    CHECK(train.size() == 60000);
    CHECK(train.labels[0] == 5);  // first label of the official training set

    // byte-exact round trip against the decompressed originals
    CHECK(to_idx_images(train) == raw);
    CHECK(to_idx_labels(train) == gunzip_file(lpath));

    // 80/20 split
    auto [tr, val] = split_train_val(train, 17);
    CHECK(tr.size() == 48000);
    CHECK(val.size() == 12000);
    CHECK(tr.split == "train");
    CHECK(val.split == "val");
}

TEST_CASE("split is deterministic, disjoint, and exhaustive") {
    auto [a_train, a_val] = split_indices(60000, 48000, 99);
    auto [b_train, b_val] = split_indices(60000, 48000, 99);
    CHECK(a_train == b_train);
    CHECK(a_val == b_val);
    CHECK(a_train.size() == 48000);
    CHECK(a_val.size() == 12000);

    std::set<std::size_t> all(a_train.begin(), a_train.end());
    for (auto i : a_val) CHECK(all.insert(i).second);  // no overlap
    CHECK(all.size() == 60000);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 59999);

    auto [c_train, c_val] = split_indices(60000, 48000, 100);
    CHECK(a_train != c_train);
}

TEST_CASE("split_train_val rejects wrong input size") {
    auto [i, l] = synthetic_pair(3);
    MnistSet tiny = load_idx(i, l);
    CHECK_THROWS_WITH_AS(split_train_val(tiny, 1), doctest::Contains("60,000"), DataError);
}

TEST_CASE("gaussian noise: identity at zero, correct scale, clamped range") {
    auto [i, l] = synthetic_pair(2);
    MnistSet set = load_idx(i, l);

    Rng rng0(5, "noise");
    Tensor same = add_gaussian_noise(set.images, 0.0, rng0);
    CHECK(same.data() == set.images.data());

    // pre-clamp noise magnitude: replay the identical stream
    const std::size_t n = 128 * 784;  // > 1e5 pixels
    Tensor half = Tensor::full({128, 784}, 0.5);
    Rng rng1(6, "noise");
    Tensor noisy = add_gaussian_noise(half, 0.3, rng1);

    Rng rng2(6, "noise");
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double draw = rng2.normal(0.0, 0.3);
        s += draw;
        s2 += draw * draw;
        const double expect = std::clamp(0.5 + draw, 0.0, 1.0);
        CHECK(noisy.data()[k] == doctest::Approx(expect).epsilon(1e-15));
    }
    const double mean = s / n;
    const double stddev = std::sqrt(s2 / n - mean * mean);
    CHECK(std::abs(stddev - 0.3) < 0.01);

    for (double v : noisy.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("batches: sizes, determinism, coverage") {
    auto [i, l] = synthetic_pair(5);
    MnistSet set = load_idx(i, l);

    Rng rng(3, "batches");
    Batches batches(set, 2, rng);
    CHECK(batches.batch_count() == 3);
    Tensor imgs;
    std::vector<int> labels;
    std::vector<std::size_t> sizes;
    std::vector<int> seen;
    while (batches.next(imgs, labels)) {
        sizes.push_back(labels.size());
        for (int lab : labels) seen.push_back(lab);
    }
    CHECK(sizes == std::vector<std::size_t>{2, 2, 1});
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});  // labels are 0..4, each once

    // same seed, same order
    Rng rng_a(4, "batches");
    Rng rng_b(4, "batches");
    Batches ba(set, 2, rng_a), bb(set, 2, rng_b);
    Tensor ia, ib;
    std::vector<int> la, lb;
    while (ba.next(ia, la)) {
        REQUIRE(bb.next(ib, lb));
        CHECK(la == lb);
        CHECK(ia.data() == ib.data());
    }
}
