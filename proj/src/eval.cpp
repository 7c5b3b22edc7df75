#include "lsrl/eval.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lsrl/csv.hpp"
#include "lsrl/errors.hpp"
#include "lsrl/ops.hpp"

namespace lsrl {

namespace {
constexpr std::size_t kChunk = 500;

Tensor rows_of(const Tensor& images, std::size_t start, std::size_t n) {
    const std::size_t cols = images.shape()[1];
    std::vector<double> d(n * cols);
    std::memcpy(d.data(), images.data().data() + start * cols, n * cols * sizeof(double));
    return Tensor::from_data({n, cols}, std::move(d));
}
}  // namespace

std::vector<EvalCase> evaluate_cases(const Actor& actor, const AutoEncoder& ae,
                                     const Classifier& clf, const Generator& gen,
                                     const Discriminator& disc, const MnistSet& test,
                                     double noise_sigma, RewardWeights weights,
                                     bool d_on_reencoded, std::uint64_t seed) {
    const std::size_t n = test.size();
    std::vector<EvalCase> cases(n);

    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t count = std::min(kChunk, n - start);
        Tensor images = rows_of(test.images, start, count);

        std::vector<int> tasks(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t index = start + i;
            Rng task_rng(seed, "eval/task/" + std::to_string(index));
            tasks[i] = static_cast<int>(task_rng.choice(10));
            if (noise_sigma > 0.0) {
                Rng noise_rng(seed, "eval/noise/" + std::to_string(index));
                auto& px = images.mutable_data();
                for (std::size_t p = 0; p < 784; ++p) {
                    const std::size_t at = i * 784 + p;
                    px[at] = std::clamp(px[at] + noise_rng.normal(0.0, noise_sigma), 0.0, 1.0);
                }
            }
        }

        Tensor codes = ae.encode(images);
        Tensor states = concat_last(codes, onehot(tasks, 10));
        Tensor actions = clamp(actor.forward(states), -1.0, 1.0);
        Tensor generated = gen.forward(actions);
        Tensor decoded = ae.decode(generated);
        Tensor probs = clf.probs(decoded);
        const auto predictions = argmax_last(probs);
        Tensor d_input = d_on_reencoded ? ae.encode(decoded) : generated;
        Tensor d_scores = disc.score(d_input);

        for (std::size_t i = 0; i < count; ++i) {
            EvalCase& c = cases[start + i];
            c.index = start + i;
            c.label = test.labels[start + i];
            c.task = tasks[i];
            c.target = (c.label + c.task) % 10;
            c.predicted = static_cast<int>(predictions[i]);
            c.p_target = probs.at({i, static_cast<std::size_t>(c.target)});
            c.d_value = d_scores.at({i, 0});
            c.reward = weights.lambda_cl * c.p_target +
                       weights.lambda_d * std::min(0.0, -1.0 + c.d_value);
        }
    }
    return cases;
}

double accuracy_of(const std::vector<EvalCase>& cases) {
    if (cases.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& c : cases) correct += (c.predicted == c.target) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(cases.size());
}

std::array<double, 10> per_task_accuracy_of(const std::vector<EvalCase>& cases) {
    std::array<double, 10> acc{};
    std::array<std::size_t, 10> total{}, correct{};
    for (const auto& c : cases) {
        total[c.task] += 1;
        correct[c.task] += (c.predicted == c.target) ? 1 : 0;
    }
    for (int t = 0; t < 10; ++t) {
        acc[t] = total[t] ? static_cast<double>(correct[t]) / static_cast<double>(total[t]) : 0.0;
    }
    return acc;
}

double mean_d_real(const AutoEncoder& ae, const Discriminator& disc, const MnistSet& test) {
    double sum = 0.0;
    for (std::size_t start = 0; start < test.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, test.size() - start);
        Tensor scores = disc.score(ae.encode(rows_of(test.images, start, count)));
        for (double v : scores.data()) sum += v;
    }
    return sum / static_cast<double>(test.size());
}

EvalReport evaluate(const Actor& actor, const AutoEncoder& ae, const Classifier& clf,
                    const Generator& gen, const Discriminator& disc, const MnistSet& test,
                    double noise_sigma, RewardWeights weights, bool d_on_reencoded,
                    std::uint64_t seed, std::vector<EvalCase>* clean_out,
                    std::vector<EvalCase>* noisy_out) {
    EvalReport report;
    report.n_samples = test.size();
    report.noise_sigma = noise_sigma;

    auto clean = evaluate_cases(actor, ae, clf, gen, disc, test, 0.0, weights, d_on_reencoded, seed);
    report.accuracy_clean = accuracy_of(clean);
    report.per_task_accuracy = per_task_accuracy_of(clean);

    double p_sum = 0.0, d_gen_sum = 0.0;
    for (const auto& c : clean) {
        p_sum += c.p_target;
        d_gen_sum += c.d_value;
    }
    report.classifier_quality_avg = weights.lambda_cl * (p_sum / static_cast<double>(clean.size()));
    report.d_generated_avg = d_gen_sum / static_cast<double>(clean.size());
    report.d_real_avg = mean_d_real(ae, disc, test);

    if (noise_sigma > 0.0) {
        auto noisy =
            evaluate_cases(actor, ae, clf, gen, disc, test, noise_sigma, weights, d_on_reencoded, seed);
        report.accuracy_noisy = accuracy_of(noisy);
        if (noisy_out) *noisy_out = std::move(noisy);
    }
    if (clean_out) *clean_out = std::move(clean);
    return report;
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os << "samples:                " << n_samples << "\n";
    os << "accuracy (clean):       " << accuracy_clean * 100.0 << "%\n";
    os << "accuracy (noisy s=" << noise_sigma << "): " << accuracy_noisy * 100.0 << "%\n";
    os << "classifier quality avg: " << classifier_quality_avg << "\n";
    os << "D on real codes avg:    " << d_real_avg << "\n";
    os << "D on generated avg:     " << d_generated_avg << "\n";
    os << "per-task accuracy:";
    for (int t = 0; t < 10; ++t) os << " " << per_task_accuracy[t] * 100.0 << "%";
    os << "\n";
    return os.str();
}

std::string EvalReport::to_kv() const {
    std::ostringstream os;
    os << "n_samples=" << n_samples << "\n";
    os << "accuracy_clean=" << CsvWriter::num(accuracy_clean) << "\n";
    os << "accuracy_noisy=" << CsvWriter::num(accuracy_noisy) << "\n";
    os << "noise_sigma=" << CsvWriter::num(noise_sigma) << "\n";
    os << "classifier_quality_avg=" << CsvWriter::num(classifier_quality_avg) << "\n";
    os << "d_real_avg=" << CsvWriter::num(d_real_avg) << "\n";
    os << "d_generated_avg=" << CsvWriter::num(d_generated_avg) << "\n";
    for (int t = 0; t < 10; ++t) {
        os << "per_task_accuracy_" << t << "=" << CsvWriter::num(per_task_accuracy[t]) << "\n";
    }
    return os.str();
}

void write_cases_csv(const std::string& path, const std::vector<EvalCase>& cases) {
    CsvWriter w(path, {"index", "label", "task", "target", "predicted", "p_target", "d_value",
                       "reward"});
    for (const auto& c : cases) {
        w.row({CsvWriter::num(std::uint64_t(c.index)), std::to_string(c.label),
               std::to_string(c.task), std::to_string(c.target), std::to_string(c.predicted),
               CsvWriter::num(c.p_target), CsvWriter::num(c.d_value), CsvWriter::num(c.reward)});
    }
}

std::vector<EvalCase> read_cases_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    std::vector<EvalCase> cases;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string cell;
        EvalCase c;
        auto next = [&] {
            if (!std::getline(is, cell, ',')) throw DataError("malformed case row in " + path);
            return cell;
        };
        c.index = std::stoull(next());
        c.label = std::stoi(next());
        c.task = std::stoi(next());
        c.target = std::stoi(next());
        c.predicted = std::stoi(next());
        c.p_target = std::stod(next());
        c.d_value = std::stod(next());
        c.reward = std::stod(next());
        cases.push_back(c);
    }
    return cases;
}

}  // namespace lsrl
