#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "lsrl/tensor.hpp"

namespace lsrl {

// Dynamic reverse-mode tape. Constructing a Tape makes it the active tape for
// the current thread; ops record themselves onto it while it is active. The
// backward pass walks nodes in strict reverse recording order exactly once
// and clears the tape.
//
// Gradients accumulate: running two backward passes without zeroing grads in
// between sums the contributions.
class Tape {
public:
    struct Node {
        std::vector<std::shared_ptr<TensorImpl>> inputs;
        std::shared_ptr<TensorImpl> output;
        std::function<void()> backward;
    };

    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(Node node) { nodes_.push_back(std::move(node)); }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor with
    // requires_grad. The loss must be scalar; the tape is cleared afterward.
    void backward(const Tensor& loss);

    static Tape* current();

private:
    std::vector<Node> nodes_;
    Tape* previous_ = nullptr;
};

}  // namespace lsrl
