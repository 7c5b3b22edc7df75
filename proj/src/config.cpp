#include "lsrl/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "lsrl/errors.hpp"
#include "lsrl/rng.hpp"

namespace lsrl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Key {
    const char* name;
    std::function<void(RunConfig&, const std::string&, int)> set;
    std::function<std::string(const RunConfig&)> get;
    // paths and seed identify a run, not the optimization recipe; they stay
    // out of the hyperparameter hash embedded in checkpoints
    bool hyper = true;
};

void parse_u64(const std::string& v, int line_no, std::uint64_t& out) {
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        out = x;
    } catch (...) {
        throw DataError("config parse error at line " + std::to_string(line_no) +
                        ": expected integer, got '" + v + "'");
    }
}

void parse_f64(const std::string& v, int line_no, double& out) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        out = x;
    } catch (...) {
        throw DataError("config parse error at line " + std::to_string(line_no) +
                        ": expected number, got '" + v + "'");
    }
}

#define U64_KEY(key, field)                                                            \
    Key{key, [](RunConfig& c, const std::string& v, int ln) { parse_u64(v, ln, c.field); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }}
#define F64_KEY(key, field)                                                            \
    Key{key, [](RunConfig& c, const std::string& v, int ln) { parse_f64(v, ln, c.field); }, \
        [](const RunConfig& c) { return fmt_double(c.field); }}
#define STR_KEY(key, field)                                                  \
    Key{key, [](RunConfig& c, const std::string& v, int) { c.field = v; },   \
        [](const RunConfig& c) { return c.field; }}

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        {"data.dir", [](RunConfig& c, const std::string& v, int) { c.data_dir = v; },
         [](const RunConfig& c) { return c.data_dir; }, false},
        {"out", [](RunConfig& c, const std::string& v, int) { c.out_dir = v; },
         [](const RunConfig& c) { return c.out_dir; }, false},
        {"seed", [](RunConfig& c, const std::string& v, int ln) { parse_u64(v, ln, c.seed); },
         [](const RunConfig& c) { return std::to_string(c.seed); }, false},
        U64_KEY("scale", scale),
        U64_KEY("ae.epochs", ae.epochs),
        U64_KEY("ae.batch", ae.batch),
        F64_KEY("ae.lr", ae.lr),
        U64_KEY("clf.epochs", clf.epochs),
        U64_KEY("clf.batch", clf.batch),
        F64_KEY("clf.lr", clf.lr),
        F64_KEY("clf.accuracy_gate", clf.accuracy_gate),
        U64_KEY("gan.steps", gan.steps),
        U64_KEY("gan.batch", gan.batch),
        F64_KEY("gan.lr", gan.lr),
        U64_KEY("gan.channels", gan.channels),
        U64_KEY("gan.z_dim", gan.z_dim),
        U64_KEY("gan.ckpt_interval", gan.ckpt_interval),
        U64_KEY("gan.log_interval", gan.log_interval),
        U64_KEY("rl.steps", rl.steps),
        U64_KEY("rl.batch", rl.batch),
        U64_KEY("rl.actor_batch", rl.actor_batch),
        F64_KEY("rl.lr", rl.lr),
        U64_KEY("rl.warmup", rl.warmup),
        U64_KEY("rl.eval_interval", rl.eval_interval),
        F64_KEY("rl.gamma", rl.gamma),
        F64_KEY("rl.tau", rl.tau),
        F64_KEY("rl.policy_noise", rl.policy_noise),
        F64_KEY("rl.noise_clip", rl.noise_clip),
        U64_KEY("rl.policy_delay", rl.policy_delay),
        F64_KEY("rl.expl_noise", rl.expl_noise),
        U64_KEY("rl.buffer_capacity", rl.buffer_capacity),
        U64_KEY("rl.eval_subset", rl.eval_subset),
        F64_KEY("reward.lambda_cl", reward.lambda_cl),
        F64_KEY("reward.lambda_d", reward.lambda_d),
        F64_KEY("reward.noise_sigma", reward.noise_sigma),
        STR_KEY("reward.d_input", reward.d_input),
    };
    return keys;
}

#undef U64_KEY
#undef F64_KEY
#undef STR_KEY

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& raw, int line_no) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw DataError("config parse error at line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (const auto& k : key_table()) {
        if (key == k.name) {
            k.set(cfg, value, line_no);
            return;
        }
    }
    throw DataError("config parse error at line " + std::to_string(line_no) +
                    ": unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        apply_config_line(cfg, line, line_no);
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    auto positive = [](std::uint64_t v, const char* name) {
        if (v == 0) throw DataError(std::string("config: ") + name + " must be positive");
    };
    positive(scale, "scale");
    positive(ae.batch, "ae.batch");
    positive(clf.batch, "clf.batch");
    positive(gan.batch, "gan.batch");
    positive(gan.z_dim, "gan.z_dim");
    positive(gan.channels, "gan.channels");
    positive(rl.batch, "rl.batch");
    positive(rl.eval_interval, "rl.eval_interval");
    positive(rl.policy_delay, "rl.policy_delay");
    positive(rl.buffer_capacity, "rl.buffer_capacity");
    if (128 % gan.channels != 0) {
        throw DataError("config: gan.channels must divide the 128-unit hidden layer");
    }
    if (rl.tau <= 0.0 || rl.tau > 1.0) throw DataError("config: rl.tau must be in (0, 1]");
    if (rl.noise_clip < 0.0) throw DataError("config: rl.noise_clip must be >= 0");
    if (rl.gamma < 0.0 || rl.gamma > 1.0) throw DataError("config: rl.gamma must be in [0, 1]");
    if (reward.lambda_cl < 0.0 || reward.lambda_d < 0.0) {
        throw DataError("config: reward weights must be >= 0");
    }
    if (reward.noise_sigma < 0.0) throw DataError("config: reward.noise_sigma must be >= 0");
    if (reward.d_input != "code" && reward.d_input != "reencoded") {
        throw DataError("config: reward.d_input must be 'code' or 'reencoded'");
    }
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& k : key_table()) {
        os << k.name << " = " << k.get(cfg) << "\n";
    }
    return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& k : key_table()) {
        if (k.hyper) os << k.name << " = " << k.get(cfg) << "\n";
    }
    const std::string s = os.str();
    return fnv1a64(s.data(), s.size());
}

}  // namespace lsrl
