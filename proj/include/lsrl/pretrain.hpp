#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsrl/config.hpp"
#include "lsrl/mnist.hpp"
#include "lsrl/models.hpp"

namespace lsrl {

struct AeTrainResult {
    double initial_val_bce = 0.0;
    double final_val_bce = 0.0;
    std::vector<double> val_bce_per_epoch;
};

// Minimizes reconstruction BCE with the configured batch size, learning rate
// and (scale-divided) epoch count. Aborts with DivergenceError if the
// validation BCE goes NaN or above its value at initialization.
AeTrainResult train_autoencoder(AutoEncoder& ae, const MnistSet& train, const MnistSet& val,
                                const RunConfig& cfg, const std::string& log_path);

double validation_bce(const AutoEncoder& ae, const MnistSet& set);

struct ClfTrainResult {
    double test_accuracy = 0.0;
    std::array<std::array<int, 10>, 10> confusion{};  // [true][predicted]
    std::vector<double> val_accuracy_per_epoch;
};

ClfTrainResult train_classifier(Classifier& clf, const MnistSet& train, const MnistSet& val,
                                const MnistSet& test, const RunConfig& cfg,
                                const std::string& log_path);

double classifier_accuracy(const Classifier& clf, const MnistSet& set);
std::string format_confusion(const std::array<std::array<int, 10>, 10>& confusion);

// Alternating hinge-loss GAN on encoded training codes: one discriminator
// update then one generator update per step, z ~ U(-1,1)^z_dim (so the
// generator's training domain equals the agent's action space). Writes
// both checkpoints every ckpt_interval and at the end, and aborts if the
// mean |D| stays above 100 for 1000 consecutive steps.
struct GanTrainResult {
    double final_d_loss = 0.0;
    double final_g_loss = 0.0;
};

GanTrainResult train_lgan(Generator& gen, Discriminator& disc, const Tensor& codes,
                          const RunConfig& cfg, const std::string& log_path,
                          const std::string& gen_ckpt, const std::string& disc_ckpt);

// E(x) for a whole split, cached on disk next to the hash of the encoder
// parameters; a stale cache (hash mismatch) is rebuilt, not reused.
Tensor encode_dataset(const AutoEncoder& ae, const MnistSet& set, const std::string& cache_path);

}  // namespace lsrl
