#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "lsrl/errors.hpp"
#include "lsrl/eval.hpp"
#include "lsrl/pgm.hpp"
#include "test_helpers.hpp"

using namespace lsrl;
using namespace lsrl::testing;
namespace fs = std::filesystem;

TEST_CASE("pgm header and payload for a single tile") {
    Tensor one = Tensor::full({1, 784}, 1.0);
    auto bytes = render_grid(one, 1);
    const std::string expected_header = "P5\n28 28\n255\n";
    REQUIRE(bytes.size() == expected_header.size() + 784);
    CHECK(std::string(bytes.begin(), bytes.begin() + expected_header.size()) == expected_header);
    for (std::size_t i = expected_header.size(); i < bytes.size(); ++i) {
        CHECK(bytes[i] == 255);  // pixel 1.0 -> byte 255
    }
}

TEST_CASE("pgm grid geometry for 48 tiles in 8 columns") {
    Tensor imgs = Tensor::full({48, 784}, 0.5);
    auto bytes = render_grid(imgs, 8);
    // 8 cols, 6 rows, 2-pixel separators
    const std::string expected_header = "P5\n238 178\n255\n";
    REQUIRE(bytes.size() >= expected_header.size());
    CHECK(std::string(bytes.begin(), bytes.begin() + expected_header.size()) == expected_header);
    CHECK(bytes.size() == expected_header.size() + 238 * 178);

    // separator columns stay black
    const std::uint8_t* canvas = bytes.data() + expected_header.size();
    CHECK(canvas[28] == 0);
    CHECK(canvas[29] == 0);
    CHECK(canvas[0] == 128);  // 0.5 -> round(127.5) = 128
}

TEST_CASE("ragged final grid row is padded with black tiles") {
    Tensor imgs = Tensor::full({5, 784}, 1.0);
    auto bytes = render_grid(imgs, 4);  // two rows, last row has 3 empty slots
    const std::string header = "P5\n118 58\n255\n";
    CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
    const std::uint8_t* canvas = bytes.data() + header.size();
    // top-left of the second tile slot in row 2 (empty) is black
    CHECK(canvas[(30 * 118) + 30] == 0);
    // top-left of the first tile in row 2 is white
    CHECK(canvas[(30 * 118) + 0] == 255);
}

TEST_CASE("render_grid rejects degenerate input") {
    CHECK_THROWS_AS(render_grid(Tensor::full({2, 100}, 0.0), 2), ShapeError);
    CHECK_THROWS_AS(render_grid(Tensor::full({2, 784}, 0.0), 0), StateError);
    CHECK_THROWS_AS(Tensor::zeros({0, 784}), ShapeError);  // k = 0 is unconstructible
}

TEST_CASE("translation sheet layout and sidecar format") {
    Tensor inputs = Tensor::full({10, 784}, 0.25);
    Tensor outputs = Tensor::full({10, 784}, 0.75);
    std::vector<int> labels(10, 5), tasks(10, 2), preds(10, 7);
    auto sheet = render_translation_sheet(inputs, labels, tasks, outputs, preds);

    const std::string header = "P5\n58 298\n255\n";  // 2 cols, 10 rows
    CHECK(std::string(sheet.pgm.begin(), sheet.pgm.begin() + header.size()) == header);
    // sidecar line for (5, +2, 7)
    CHECK(sheet.sidecar.substr(0, 10) == "5 +2 -> 7\n");

    std::vector<int> short_tasks(9, 1);
    CHECK_THROWS_AS(render_translation_sheet(inputs, labels, short_tasks, outputs, preds),
                    ShapeError);
    CHECK_THROWS_AS(render_translation_sheet(inputs, {}, {}, outputs, {}), StateError);
}

namespace {
struct EvalFixture {
    Actor actor = Actor::init(71);
    AutoEncoder ae = AutoEncoder::init(72);
    Classifier clf = Classifier::init(73);
    Generator gen = Generator::init(74);
    Discriminator disc = Discriminator::init(75);
    MnistSet test = synthetic_set(60, 76);
    RewardWeights w{};
};
}  // namespace

TEST_CASE("evaluation cases: targets, rewards, and task stability across noise") {
    EvalFixture fx;
    auto clean = evaluate_cases(fx.actor, fx.ae, fx.clf, fx.gen, fx.disc, fx.test, 0.0, fx.w,
                                false, 99);
    REQUIRE(clean.size() == 60);
    for (const auto& c : clean) {
        CHECK(c.target == (c.label + c.task) % 10);
        CHECK(c.label == fx.test.labels[c.index]);
        const double expected_reward =
            fx.w.lambda_cl * c.p_target + fx.w.lambda_d * std::min(0.0, -1.0 + c.d_value);
        CHECK(c.reward == doctest::Approx(expected_reward).epsilon(1e-12));
        CHECK(c.p_target >= 0.0);
        CHECK(c.p_target <= 1.0);
    }

    // noise changes pixels but not the seeded tasks
    auto noisy = evaluate_cases(fx.actor, fx.ae, fx.clf, fx.gen, fx.disc, fx.test, 0.3, fx.w,
                                false, 99);
    REQUIRE(noisy.size() == clean.size());
    bool any_field_changed = false;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        CHECK(noisy[i].task == clean[i].task);
        any_field_changed |= noisy[i].p_target != clean[i].p_target;
    }
    CHECK(any_field_changed);

    // sigma = 0 is bitwise identical to the clean path
    auto clean2 = evaluate_cases(fx.actor, fx.ae, fx.clf, fx.gen, fx.disc, fx.test, 0.0, fx.w,
                                 false, 99);
    for (std::size_t i = 0; i < clean.size(); ++i) {
        CHECK(clean2[i].p_target == clean[i].p_target);
        CHECK(clean2[i].d_value == clean[i].d_value);
        CHECK(clean2[i].reward == clean[i].reward);
    }
}

TEST_CASE("report aggregates are recounts of the per-case log") {
    EvalFixture fx;
    std::vector<EvalCase> clean, noisy;
    EvalReport report = evaluate(fx.actor, fx.ae, fx.clf, fx.gen, fx.disc, fx.test, 0.3, fx.w,
                                 false, 5, &clean, &noisy);

    CHECK(report.n_samples == 60);
    CHECK(report.accuracy_clean == doctest::Approx(accuracy_of(clean)).epsilon(1e-15));
    CHECK(report.accuracy_noisy == doctest::Approx(accuracy_of(noisy)).epsilon(1e-15));

    double p_sum = 0.0, d_sum = 0.0;
    for (const auto& c : clean) {
        p_sum += c.p_target;
        d_sum += c.d_value;
    }
    CHECK(report.classifier_quality_avg ==
          doctest::Approx(fx.w.lambda_cl * p_sum / clean.size()).epsilon(1e-12));
    CHECK(report.d_generated_avg == doctest::Approx(d_sum / clean.size()).epsilon(1e-12));
    CHECK(report.classifier_quality_avg / fx.w.lambda_cl >= 0.0);
    CHECK(report.classifier_quality_avg / fx.w.lambda_cl <= 1.0);

    // per-task accuracies recombine into the overall accuracy
    auto per_task = per_task_accuracy_of(clean);
    std::array<std::size_t, 10> counts{};
    for (const auto& c : clean) counts[c.task] += 1;
    double recombined = 0.0;
    for (int t = 0; t < 10; ++t) recombined += per_task[t] * counts[t];
    CHECK(recombined / clean.size() == doctest::Approx(report.accuracy_clean).epsilon(1e-12));
    for (int t = 0; t < 10; ++t) {
        CHECK(report.per_task_accuracy[t] == doctest::Approx(per_task[t]).epsilon(1e-15));
    }

    // csv round trip supports exact recounting
    const auto path = (fs::temp_directory_path() / "eval_cases_test.csv").string();
    write_cases_csv(path, clean);
    auto reread = read_cases_csv(path);
    REQUIRE(reread.size() == clean.size());
    CHECK(accuracy_of(reread) == doctest::Approx(report.accuracy_clean).epsilon(1e-15));
    for (std::size_t i = 0; i < clean.size(); ++i) {
        CHECK(reread[i].predicted == clean[i].predicted);
        CHECK(reread[i].p_target == doctest::Approx(clean[i].p_target).epsilon(1e-15));
    }

    // kv block carries the same numbers
    const std::string kv = report.to_kv();
    CHECK(kv.find("accuracy_clean=") != std::string::npos);
    CHECK(kv.find("classifier_quality_avg=") != std::string::npos);
}

TEST_CASE("fixed-task evaluation matches the per-task breakdown entry") {
    EvalFixture fx;
    auto clean = evaluate_cases(fx.actor, fx.ae, fx.clf, fx.gen, fx.disc, fx.test, 0.0, fx.w,
                                false, 42);
    auto breakdown = per_task_accuracy_of(clean);

    // recompute task-3 cases only, by filtering the general run
    std::size_t n3 = 0, correct3 = 0;
    for (const auto& c : clean) {
        if (c.task == 3) {
            ++n3;
            correct3 += c.predicted == c.target;
        }
    }
    if (n3 > 0) {
        CHECK(breakdown[3] == doctest::Approx(double(correct3) / n3).epsilon(1e-15));
    }
}
