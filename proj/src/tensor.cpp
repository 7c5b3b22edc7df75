#include "lsrl/tensor.hpp"

#include <cmath>
#include <sstream>

#include "lsrl/errors.hpp"

namespace lsrl {

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << " x ";
        os << s[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("zero-sized dimension in shape " + shape_str(shape));
    }
    auto impl = std::make_shared<TensorImpl>();
    impl->data.assign(shape_numel(shape), value);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return wrap(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("zero-sized dimension in shape " + shape_str(shape));
    }
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return wrap(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged matrix literal");
        data.insert(data.end(), row.begin(), row.end());
    }
    return from_data({r, c}, std::move(data), requires_grad);
}

double Tensor::value() const {
    if (!impl_ || impl_->data.size() != 1) {
        throw StateError("value() requires a size-1 tensor, got shape " +
                         (impl_ ? shape_str(impl_->shape) : std::string("<null>")));
    }
    return impl_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> idx) const {
    const Shape& s = impl_->shape;
    if (idx.size() != s.size()) {
        throw ShapeError("index rank " + std::to_string(idx.size()) +
                         " does not match tensor shape " + shape_str(s));
    }
    std::size_t flat = 0;
    std::size_t k = 0;
    for (std::size_t i : idx) {
        if (i >= s[k]) throw ShapeError("index out of range");
        flat = flat * s[k] + i;
        ++k;
    }
    return impl_->data[flat];
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    impl->requires_grad = impl_->requires_grad;
    return wrap(std::move(impl));
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace lsrl
