#include "lsrl/gradcheck_suite.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "lsrl/gradcheck.hpp"
#include "lsrl/models.hpp"
#include "lsrl/nn.hpp"
#include "lsrl/ops.hpp"

namespace lsrl {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
    std::vector<double> d(shape_numel(shape));
    for (double& x : d) x = scale * rng.normal();
    return Tensor::from_data(std::move(shape), std::move(d));
}

struct Suite {
    std::uint64_t seed;
    std::ostringstream out;
    bool pass = true;
    double worst = 0.0;

    void note(const std::string& name, const GradCheckReport& r) {
        const bool ok = r.pass();
        pass = pass && ok;
        worst = std::max(worst, r.max_rel_err);
        out << (ok ? "  ok   " : "  FAIL ") << name << "  max_rel_err=" << r.max_rel_err
            << "  coords=" << r.coords_checked;
        if (!ok) out << "  worst=" << r.worst_param;
        out << "\n";
    }
};

void check_primitives(Suite& s) {
    Rng rng(s.seed, "gradcheck/ops");
    auto unary = [&](const char* name, auto&& build) {
        ParamStore store;
        store.add("x", random_tensor({2, 3, 4}, rng));
        Tensor w = random_tensor(build(store.at("x")).shape(), rng);
        auto fn = [&] { return sum(mul(build(store.at("x")), w)); };
        s.note(std::string("op ") + name, grad_check(fn, store));
    };
    unary("exp", [](const Tensor& x) { return exp(mul(x, 0.3)); });
    unary("log", [](const Tensor& x) { return log(add(mul(x, 0.1), 2.0)); });
    unary("tanh", [](const Tensor& x) { return tanh(x); });
    unary("sigmoid", [](const Tensor& x) { return sigmoid(x); });
    unary("leaky_relu", [](const Tensor& x) { return leaky_relu(x, 0.2); });
    unary("softmax", [](const Tensor& x) { return softmax(x); });
    unary("clamp", [](const Tensor& x) { return clamp(x, -0.5, 0.5); });
    unary("reshape", [](const Tensor& x) { return reshape(x, {6, 4}); });
    unary("transpose", [](const Tensor& x) { return transpose_last2(x); });
    unary("sum", [](const Tensor& x) { return sum(x); });
    unary("mean", [](const Tensor& x) { return mean(x); });
    unary("sum_axis", [](const Tensor& x) { return sum_axis(x, 1); });
    unary("mean_axis", [](const Tensor& x) { return mean_axis(x, 2); });
    unary("slice", [](const Tensor& x) { return slice_last(x, 1, 2); });
    unary("scalar chain", [](const Tensor& x) { return div(sub(mul(x, 2.5), 1.0), 4.0); });

    auto binary = [&](const char* name, auto&& build, Shape sa, Shape sb, bool positive_b) {
        ParamStore store;
        store.add("a", random_tensor(sa, rng));
        Tensor b = random_tensor(sb, rng);
        if (positive_b) {
            for (double& v : b.mutable_data()) v = 2.0 + 0.1 * std::abs(v);
        }
        store.add("b", b);
        Tensor w = random_tensor(build(store.at("a"), store.at("b")).shape(), rng);
        auto fn = [&] { return sum(mul(build(store.at("a"), store.at("b")), w)); };
        s.note(std::string("op ") + name, grad_check(fn, store));
    };
    binary("add", [](auto& a, auto& b) { return add(a, b); }, {3, 4}, {3, 4}, false);
    binary("add broadcast", [](auto& a, auto& b) { return add(a, b); }, {3, 4}, {4}, false);
    binary("sub", [](auto& a, auto& b) { return sub(a, b); }, {3, 4}, {3, 4}, false);
    binary("mul", [](auto& a, auto& b) { return mul(a, b); }, {3, 4}, {4}, false);
    binary("div", [](auto& a, auto& b) { return div(a, b); }, {3, 4}, {3, 4}, true);
    binary("div by scalar tensor", [](auto& a, auto& b) { return div(a, b); }, {3, 4}, {1}, true);
    binary("concat", [](auto& a, auto& b) { return concat_last(a, b); }, {3, 4}, {3, 2}, false);
    binary("matmul", [](auto& a, auto& b) { return matmul(a, b); }, {3, 4}, {4, 2}, false);
    binary("matmul batched", [](auto& a, auto& b) { return matmul(a, b); }, {2, 3, 4}, {4, 2},
           false);
}

void check_networks(Suite& s) {
    Rng coord_rng(s.seed, "gradcheck/coords");

    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Rng rng(s.seed + trial, "gradcheck/nets");
        const std::string tag = " #" + std::to_string(trial);

        Tensor x = random_tensor({2, 784}, rng);
        for (double& v : x.mutable_data()) v = 0.5 + 0.4 * std::tanh(v);

        AutoEncoder ae = AutoEncoder::init(s.seed + trial);
        s.note("autoencoder" + tag, grad_check([&] { return bce_loss(ae.reconstruct(x), x); },
                                               ae.params, 1e-5, 8, &coord_rng));

        Classifier clf = Classifier::init(s.seed + trial);
        std::vector<int> labels = {static_cast<int>(rng.choice(10)),
                                   static_cast<int>(rng.choice(10))};
        s.note("classifier" + tag, grad_check([&] { return cross_entropy(clf.logits(x), labels); },
                                              clf.params, 1e-5, 8, &coord_rng));

        Generator gen = Generator::init(s.seed + trial);
        Tensor z = random_tensor({2, 5}, rng);
        Tensor gw = random_tensor({2, 32}, rng);
        s.note("generator" + tag,
               grad_check([&] { return sum(mul(gen.forward(z, false), gw)); }, gen.params, 1e-5, 8,
                          &coord_rng));

        Discriminator disc = Discriminator::init(s.seed + trial);
        Tensor codes = random_tensor({2, 32}, rng);
        s.note("discriminator" + tag,
               grad_check([&] { return mean(tanh(disc.score(codes, false))); }, disc.params, 1e-5,
                          8, &coord_rng));

        Actor actor = Actor::init(s.seed + trial);
        Tensor states = random_tensor({2, 42}, rng);
        Tensor aw = random_tensor({2, 5}, rng);
        s.note("actor" + tag, grad_check([&] { return sum(mul(actor.forward(states), aw)); },
                                         actor.params, 1e-5, 8, &coord_rng));

        Critic critic = Critic::init(s.seed + trial, "init/critic1");
        Tensor actions = random_tensor({2, 5}, rng, 0.5);
        s.note("critic" + tag, grad_check([&] { return mean(critic.q(states, actions)); },
                                          critic.params, 1e-5, 8, &coord_rng));
    }
}

}  // namespace

GradSuiteResult run_gradcheck_suite(std::uint64_t seed) {
    Suite s{seed, {}, true, 0.0};
    check_primitives(s);
    check_networks(s);
    GradSuiteResult result;
    result.pass = s.pass;
    result.worst = s.worst;
    result.report = s.out.str();
    return result;
}

}  // namespace lsrl
