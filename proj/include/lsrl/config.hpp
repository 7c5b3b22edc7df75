#pragma once

#include <cstdint>
#include <string>

namespace lsrl {

// Full run configuration. Defaults are the published training recipe; the
// scale factor divides iteration counts only (never learning rates or batch
// sizes) so scaled runs follow the same optimization trajectory, shorter.
struct RunConfig {
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::uint64_t scale = 1;

    struct {
        std::uint64_t epochs = 20;
        std::uint64_t batch = 1024;
        double lr = 0.002;
    } ae;

    struct {
        std::uint64_t epochs = 14;
        std::uint64_t batch = 128;
        double lr = 0.001;
        double accuracy_gate = 0.97;
    } clf;

    struct {
        std::uint64_t steps = 500000;
        std::uint64_t batch = 50;
        double lr = 0.00005;
        std::uint64_t channels = 16;
        std::uint64_t z_dim = 5;
        std::uint64_t ckpt_interval = 50000;
        std::uint64_t log_interval = 1;
    } gan;

    struct {
        std::uint64_t steps = 500000;
        std::uint64_t batch = 50;
        std::uint64_t actor_batch = 0;  // 0: same as batch
        double lr = 0.0005;
        std::uint64_t warmup = 50;
        std::uint64_t eval_interval = 10000;
        double gamma = 0.99;
        double tau = 0.005;
        double policy_noise = 0.2;
        double noise_clip = 0.5;
        std::uint64_t policy_delay = 2;
        double expl_noise = 0.1;
        std::uint64_t buffer_capacity = 1000000;
        std::uint64_t eval_subset = 2000;  // 0: full validation set
    } rl;

    struct {
        double lambda_cl = 30.0;
        double lambda_d = 1.0;
        double noise_sigma = 0.3;
        std::string d_input = "code";  // "code" | "reencoded"
    } reward;

    // ceil(count / scale); zero stays zero.
    std::uint64_t scaled(std::uint64_t count) const {
        return scale <= 1 ? count : (count + scale - 1) / scale;
    }

    void validate() const;
};

// Plain-text key=value config, '#' comments, dotted keys ("rl.lr = 0.0005").
// Unknown keys and malformed values are errors naming the line number.
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& line, int line_no);

// Canonical serialization (fixed key order, round-trip double formatting);
// the FNV-1a 64 hash of this text is the config hash embedded in
// checkpoints.
std::string serialize_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace lsrl
