#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsrl/env.hpp"
#include "lsrl/mnist.hpp"
#include "lsrl/models.hpp"

namespace lsrl {

struct EvalCase {
    std::size_t index = 0;
    int label = 0, task = 0, target = 0, predicted = 0;
    double p_target = 0.0, d_value = 0.0, reward = 0.0;
};

struct EvalReport {
    std::size_t n_samples = 0;
    double accuracy_clean = 0.0;
    double accuracy_noisy = 0.0;
    double classifier_quality_avg = 0.0;  // mean of lambda_cl * p_target
    double d_real_avg = 0.0;              // mean D(E(x)) over clean test images
    double d_generated_avg = 0.0;         // mean D(G(pi(s))) over generated codes
    double noise_sigma = 0.0;
    std::array<double, 10> per_task_accuracy{};

    std::string to_text() const;
    std::string to_kv() const;
};

// One case per test image: optional noise (per-image stream), encode, a
// seeded random task (per-image stream, independent of the noise so clean
// and noisy runs see identical tasks), deterministic action, generate,
// decode, classify. Correct iff argmax == (label + task) mod 10.
std::vector<EvalCase> evaluate_cases(const Actor& actor, const AutoEncoder& ae,
                                     const Classifier& clf, const Generator& gen,
                                     const Discriminator& disc, const MnistSet& test,
                                     double noise_sigma, RewardWeights weights,
                                     bool d_on_reencoded, std::uint64_t seed);

double accuracy_of(const std::vector<EvalCase>& cases);
std::array<double, 10> per_task_accuracy_of(const std::vector<EvalCase>& cases);

double mean_d_real(const AutoEncoder& ae, const Discriminator& disc, const MnistSet& test);

// Clean pass, noisy pass, and the quality averages, assembled into one
// report mirroring the published tables.
EvalReport evaluate(const Actor& actor, const AutoEncoder& ae, const Classifier& clf,
                    const Generator& gen, const Discriminator& disc, const MnistSet& test,
                    double noise_sigma, RewardWeights weights, bool d_on_reencoded,
                    std::uint64_t seed, std::vector<EvalCase>* clean_out = nullptr,
                    std::vector<EvalCase>* noisy_out = nullptr);

void write_cases_csv(const std::string& path, const std::vector<EvalCase>& cases);
std::vector<EvalCase> read_cases_csv(const std::string& path);

}  // namespace lsrl
