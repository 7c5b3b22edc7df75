#pragma once

#include <filesystem>
#include <string>

namespace lsrl {

// Artifact layout inside one output directory. Stages communicate only
// through these files.
struct OutPaths {
    std::string dir;

    std::string ae_ckpt() const { return dir + "/ae.ckpt"; }
    std::string classifier_ckpt() const { return dir + "/classifier.ckpt"; }
    std::string generator_ckpt() const { return dir + "/generator.ckpt"; }
    std::string discriminator_ckpt() const { return dir + "/discriminator.ckpt"; }
    std::string actor_ckpt() const { return dir + "/actor.ckpt"; }

    std::string ae_log() const { return dir + "/ae_log.csv"; }
    std::string clf_log() const { return dir + "/clf_log.csv"; }
    std::string gan_log() const { return dir + "/gan_log.csv"; }
    std::string rl_log() const { return dir + "/rl_log.csv"; }

    std::string codes_cache(const std::string& split) const {
        return dir + "/codes_" + split + ".bin";
    }

    std::string eval_cases(const std::string& which) const {
        return dir + "/eval_cases_" + which + ".csv";
    }
    std::string report_txt() const { return dir + "/report.txt"; }
    std::string report_kv() const { return dir + "/report.kv"; }
    std::string samples_pgm() const { return dir + "/samples.pgm"; }
    std::string translation_pgm() const { return dir + "/translation_sheet.pgm"; }
    std::string translation_txt() const { return dir + "/translation_sheet.txt"; }
};

inline void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

}  // namespace lsrl
