#include "lsrl/tape.hpp"

#include "lsrl/errors.hpp"

namespace lsrl {

namespace {
thread_local Tape* g_current_tape = nullptr;
}

Tape::Tape() : previous_(g_current_tape) {
    g_current_tape = this;
}

Tape::~Tape() {
    g_current_tape = previous_;
}

Tape* Tape::current() {
    return g_current_tape;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw StateError("backward requires a scalar loss, got shape " +
                         (loss.defined() ? shape_str(loss.shape()) : std::string("<null>")));
    }
    if (nodes_.empty()) {
        throw StateError("backward on an empty tape");
    }
    auto seed = loss.impl();
    seed->ensure_grad();
    seed->grad[0] += 1.0;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        // A node whose output never received a gradient does not feed the
        // loss; its backward rule would only add zeros.
        if (it->output->grad.empty()) continue;
        it->backward();
    }
    nodes_.clear();
}

}  // namespace lsrl
