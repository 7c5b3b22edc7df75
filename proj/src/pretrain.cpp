#include "lsrl/pretrain.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lsrl/adam.hpp"
#include "lsrl/checkpoint.hpp"
#include "lsrl/csv.hpp"
#include "lsrl/errors.hpp"
#include "lsrl/nn.hpp"
#include "lsrl/tape.hpp"

namespace lsrl {

namespace {

constexpr std::size_t kEvalChunk = 1024;

Tensor rows_of(const Tensor& images, std::size_t start, std::size_t n) {
    const std::size_t cols = images.shape()[1];
    std::vector<double> d(n * cols);
    std::memcpy(d.data(), images.data().data() + start * cols, n * cols * sizeof(double));
    return Tensor::from_data({n, cols}, std::move(d));
}

Tensor gather_rows(const Tensor& data, const std::vector<std::size_t>& idx) {
    const std::size_t cols = data.shape()[1];
    std::vector<double> d(idx.size() * cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::memcpy(d.data() + i * cols, data.data().data() + idx[i] * cols,
                    cols * sizeof(double));
    }
    return Tensor::from_data({idx.size(), cols}, std::move(d));
}

}  // namespace

double validation_bce(const AutoEncoder& ae, const MnistSet& set) {
    double total = 0.0;
    for (std::size_t start = 0; start < set.size(); start += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, set.size() - start);
        Tensor x = rows_of(set.images, start, n);
        total += bce_loss(ae.reconstruct(x), x).value() * static_cast<double>(n);
    }
    return total / static_cast<double>(set.size());
}

AeTrainResult train_autoencoder(AutoEncoder& ae, const MnistSet& train, const MnistSet& val,
                                const RunConfig& cfg, const std::string& log_path) {
    const std::uint64_t epochs = cfg.scaled(cfg.ae.epochs);
    AdamState opt(ae.params, {.lr = cfg.ae.lr});
    Rng batch_rng(cfg.seed, "ae/batches");

    CsvWriter log(log_path, {"epoch", "train_bce", "val_bce"});
    AeTrainResult result;
    result.initial_val_bce = validation_bce(ae, val);
    result.final_val_bce = result.initial_val_bce;
    log.row({CsvWriter::num(std::uint64_t(0)), CsvWriter::num(result.initial_val_bce),
             CsvWriter::num(result.initial_val_bce)});

    for (std::uint64_t epoch = 1; epoch <= epochs; ++epoch) {
        Batches batches(train, cfg.ae.batch, batch_rng);
        Tensor images;
        std::vector<int> labels;
        double train_sum = 0.0;
        std::size_t train_n = 0;
        while (batches.next(images, labels)) {
            Tape tape;
            Tensor loss = bce_loss(ae.reconstruct(images), images);
            tape.backward(loss);
            opt.step(ae.params);
            train_sum += loss.value() * static_cast<double>(labels.size());
            train_n += labels.size();
        }
        const double val_bce = validation_bce(ae, val);
        result.val_bce_per_epoch.push_back(val_bce);
        result.final_val_bce = val_bce;
        log.row({CsvWriter::num(epoch), CsvWriter::num(train_sum / train_n),
                 CsvWriter::num(val_bce)});

        if (!std::isfinite(val_bce) || val_bce > result.initial_val_bce) {
            throw DivergenceError("autoencoder diverged at epoch " + std::to_string(epoch) +
                                  ": validation BCE " + std::to_string(val_bce) + " vs initial " +
                                  std::to_string(result.initial_val_bce));
        }
    }
    return result;
}

double classifier_accuracy(const Classifier& clf, const MnistSet& set) {
    std::size_t correct = 0;
    for (std::size_t start = 0; start < set.size(); start += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, set.size() - start);
        const auto pred = clf.predict(rows_of(set.images, start, n));
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] == static_cast<std::size_t>(set.labels[start + i])) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

std::string format_confusion(const std::array<std::array<int, 10>, 10>& confusion) {
    std::ostringstream os;
    os << "true\\pred";
    for (int p = 0; p < 10; ++p) os << '\t' << p;
    os << '\n';
    for (int t = 0; t < 10; ++t) {
        os << t;
        for (int p = 0; p < 10; ++p) os << '\t' << confusion[t][p];
        os << '\n';
    }
    return os.str();
}

ClfTrainResult train_classifier(Classifier& clf, const MnistSet& train, const MnistSet& val,
                                const MnistSet& test, const RunConfig& cfg,
                                const std::string& log_path) {
    const std::uint64_t epochs = cfg.scaled(cfg.clf.epochs);
    AdamState opt(clf.params, {.lr = cfg.clf.lr});
    Rng batch_rng(cfg.seed, "clf/batches");

    CsvWriter log(log_path, {"epoch", "train_xent", "val_accuracy"});
    ClfTrainResult result;

    for (std::uint64_t epoch = 1; epoch <= epochs; ++epoch) {
        Batches batches(train, cfg.clf.batch, batch_rng);
        Tensor images;
        std::vector<int> labels;
        double train_sum = 0.0;
        std::size_t train_n = 0;
        while (batches.next(images, labels)) {
            Tape tape;
            Tensor loss = cross_entropy(clf.logits(images), labels);
            tape.backward(loss);
            opt.step(clf.params);
            train_sum += loss.value() * static_cast<double>(labels.size());
            train_n += labels.size();
            if (!std::isfinite(train_sum)) {
                throw DivergenceError("classifier loss went non-finite at epoch " +
                                      std::to_string(epoch));
            }
        }
        const double val_acc = classifier_accuracy(clf, val);
        result.val_accuracy_per_epoch.push_back(val_acc);
        log.row({CsvWriter::num(epoch), CsvWriter::num(train_sum / train_n),
                 CsvWriter::num(val_acc)});
    }

    result.test_accuracy = classifier_accuracy(clf, test);
    for (std::size_t start = 0; start < test.size(); start += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, test.size() - start);
        const auto pred = clf.predict(rows_of(test.images, start, n));
        for (std::size_t i = 0; i < n; ++i) {
            result.confusion[test.labels[start + i]][pred[i]] += 1;
        }
    }
    return result;
}

GanTrainResult train_lgan(Generator& gen, Discriminator& disc, const Tensor& codes,
                          const RunConfig& cfg, const std::string& log_path,
                          const std::string& gen_ckpt, const std::string& disc_ckpt) {
    const std::uint64_t steps = cfg.scaled(cfg.gan.steps);
    const std::uint64_t ckpt_interval = cfg.scaled(cfg.gan.ckpt_interval);
    const std::size_t batch = cfg.gan.batch;
    const std::size_t z_dim = cfg.gan.z_dim;
    const std::size_t n_codes = codes.shape()[0];
    const std::uint64_t cfg_hash = config_hash(cfg);

    AdamState g_opt(gen.params, {.lr = cfg.gan.lr});
    AdamState d_opt(disc.params, {.lr = cfg.gan.lr});
    Rng rng_data(cfg.seed, "gan/data");
    Rng rng_z(cfg.seed, "gan/z");

    CsvWriter log(log_path, {"step", "d_loss", "g_loss", "d_abs_mean"});

    auto draw_z = [&](std::size_t n) {
        std::vector<double> z(n * z_dim);
        for (double& v : z) v = 2.0 * rng_z.uniform() - 1.0;
        return Tensor::from_data({n, z_dim}, std::move(z));
    };
    auto save_both = [&] {
        save_checkpoint(gen.params, ModelKind::Generator, cfg_hash, gen_ckpt);
        save_checkpoint(disc.params, ModelKind::Discriminator, cfg_hash, disc_ckpt);
    };

    GanTrainResult result;
    std::uint64_t runaway_steps = 0;
    for (std::uint64_t step = 1; step <= steps; ++step) {
        std::vector<std::size_t> idx(batch);
        for (auto& i : idx) i = rng_data.choice(n_codes);
        Tensor real = gather_rows(codes, idx);
        Tensor fake = gen.forward(draw_z(batch), true);  // constant for the D step

        double d_abs_mean = 0.0;
        {
            Tape tape;
            Tensor d_real = disc.score(real, true);
            Tensor d_fake = disc.score(fake, true);
            Tensor d_loss = hinge_d_loss(d_real, d_fake);
            tape.backward(d_loss);
            d_opt.step(disc.params);
            result.final_d_loss = d_loss.value();
            for (double v : d_real.data()) d_abs_mean += std::abs(v);
            for (double v : d_fake.data()) d_abs_mean += std::abs(v);
            d_abs_mean /= static_cast<double>(2 * batch);
        }
        {
            Tape tape;
            Tensor d_on_fake = disc.score(gen.forward(draw_z(batch), true), true);
            Tensor g_loss = hinge_g_loss(d_on_fake);
            tape.backward(g_loss);
            g_opt.step(gen.params);
            // the generator's backward also deposited grads on D; drop them
            disc.params.zero_grads();
            result.final_g_loss = g_loss.value();
        }

        if (!std::isfinite(result.final_d_loss) || !std::isfinite(result.final_g_loss)) {
            throw DivergenceError("GAN loss went non-finite at step " + std::to_string(step));
        }
        runaway_steps = d_abs_mean > 100.0 ? runaway_steps + 1 : 0;
        if (runaway_steps >= 1000) {
            throw DivergenceError("discriminator output runaway: mean |D| > 100 for 1000 "
                                  "consecutive steps, at step " + std::to_string(step));
        }

        if (cfg.gan.log_interval > 0 && step % cfg.gan.log_interval == 0) {
            log.row({CsvWriter::num(step), CsvWriter::num(result.final_d_loss),
                     CsvWriter::num(result.final_g_loss), CsvWriter::num(d_abs_mean)});
        }
        if (ckpt_interval > 0 && step % ckpt_interval == 0 && step != steps) save_both();
    }
    save_both();
    return result;
}

namespace {
constexpr char kCacheMagic[4] = {'L', 'S', 'C', 'C'};

bool try_load_cache(const std::string& path, std::uint64_t want_hash, std::size_t want_rows,
                    Tensor& out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    char magic[4];
    std::uint64_t hash = 0, rows = 0, cols = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&hash), 8);
    f.read(reinterpret_cast<char*>(&rows), 8);
    f.read(reinterpret_cast<char*>(&cols), 8);
    if (!f || std::memcmp(magic, kCacheMagic, 4) != 0) return false;
    if (hash != want_hash || rows != want_rows || cols != AutoEncoder::kCodeDim) return false;
    std::vector<double> data(rows * cols);
    f.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!f) return false;
    out = Tensor::from_data({rows, cols}, std::move(data));
    return true;
}
}  // namespace

Tensor encode_dataset(const AutoEncoder& ae, const MnistSet& set, const std::string& cache_path) {
    const std::uint64_t ae_hash = ae.params.value_hash();

    Tensor cached;
    if (!cache_path.empty() && try_load_cache(cache_path, ae_hash, set.size(), cached)) {
        return cached;
    }

    std::vector<double> codes(set.size() * AutoEncoder::kCodeDim);
    for (std::size_t start = 0; start < set.size(); start += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, set.size() - start);
        Tensor c = ae.encode(rows_of(set.images, start, n));
        std::memcpy(codes.data() + start * AutoEncoder::kCodeDim, c.data().data(),
                    n * AutoEncoder::kCodeDim * sizeof(double));
    }
    Tensor out = Tensor::from_data({set.size(), AutoEncoder::kCodeDim}, std::move(codes));

    if (!cache_path.empty()) {
        const std::string tmp = cache_path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw DataError("cannot write code cache: " + tmp);
            const std::uint64_t rows = set.size(), cols = AutoEncoder::kCodeDim;
            f.write(kCacheMagic, 4);
            f.write(reinterpret_cast<const char*>(&ae_hash), 8);
            f.write(reinterpret_cast<const char*>(&rows), 8);
            f.write(reinterpret_cast<const char*>(&cols), 8);
            f.write(reinterpret_cast<const char*>(out.data().data()),
                    static_cast<std::streamsize>(out.size() * sizeof(double)));
        }
        if (std::rename(tmp.c_str(), cache_path.c_str()) != 0) {
            throw DataError("cannot rename " + tmp + " to " + cache_path);
        }
    }
    return out;
}

}  // namespace lsrl
