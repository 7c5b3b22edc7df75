#pragma once

#include <cstdint>
#include <string>

namespace lsrl {

// Central-finite-difference sweep (h = 1e-5, tolerance 1e-4) over every
// primitive op and each full network: autoencoder, classifier, generator,
// discriminator, actor, critic, each on 10 random inputs.
struct GradSuiteResult {
    bool pass = true;
    double worst = 0.0;
    std::string report;  // one line per check
};

GradSuiteResult run_gradcheck_suite(std::uint64_t seed = 2024);

}  // namespace lsrl
