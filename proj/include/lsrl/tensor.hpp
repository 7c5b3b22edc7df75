#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace lsrl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Shared storage behind a Tensor handle. Gradients are allocated lazily the
// first time backward reaches the tensor and then accumulate across passes
// until explicitly zeroed.
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty means "no gradient yet"
    bool requires_grad = false;

    std::size_t size() const { return data.size(); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(data.size(), 0.0);
    }
};

// Dense n-dimensional array of 64-bit reals with value semantics: copies are
// cheap handles to shared storage. Shape is fixed at construction; reshape
// returns a fresh tensor with copied data and no gradient state.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // Row-major 2-D literal, mostly for tests: Tensor::matrix({{1,2},{3,4}}).
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                         bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t size() const { return impl_->data.size(); }
    std::size_t rank() const { return impl_->shape.size(); }
    bool requires_grad() const { return impl_ && impl_->requires_grad; }

    const std::vector<double>& data() const { return impl_->data; }
    std::vector<double>& mutable_data() { return impl_->data; }

    bool has_grad() const { return impl_ && !impl_->grad.empty(); }
    const std::vector<double>& grad() const { return impl_->grad; }
    void zero_grad() { if (impl_) impl_->grad.assign(impl_->data.size(), 0.0); }
    void drop_grad() { if (impl_) impl_->grad.clear(); }

    // Scalar value of a size-1 tensor.
    double value() const;
    double at(std::initializer_list<std::size_t> idx) const;

    // Deep copy with fresh storage; grad state is not copied.
    Tensor clone() const;

    std::shared_ptr<TensorImpl> impl() const { return impl_; }
    static Tensor wrap(std::shared_ptr<TensorImpl> impl) {
        Tensor t;
        t.impl_ = std::move(impl);
        return t;
    }

private:
    std::shared_ptr<TensorImpl> impl_;
};

bool all_finite(const std::vector<double>& v);

}  // namespace lsrl
