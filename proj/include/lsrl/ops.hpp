#pragma once

#include <cstddef>
#include <vector>

#include "lsrl/tensor.hpp"

namespace lsrl {

// Differentiable primitives. Every op validates shapes (throwing ShapeError
// naming both shapes) and rejects non-finite operands (NonFiniteError). The
// result is recorded on the active tape when any operand requires a gradient.
//
// Elementwise binary ops broadcast over leading batch dimensions only: the
// smaller operand's shape must be a trailing suffix of the larger's (a size-1
// tensor broadcasts everywhere). Anything fancier is a shape error.

// Matrix product. Rank-2 x rank-2, or rank-3 with a leading batch dimension
// on either or both sides (equal batch when on both).
Tensor matmul(const Tensor& a, const Tensor& b);

// Swap the last two axes.
Tensor transpose_last2(const Tensor& t);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, double c);
Tensor sub(const Tensor& a, double c);
Tensor sub(double c, const Tensor& a);
Tensor mul(const Tensor& a, double c);
Tensor div(const Tensor& a, double c);
Tensor neg(const Tensor& a);

Tensor sum(const Tensor& t);
Tensor mean(const Tensor& t);
Tensor sum_axis(const Tensor& t, std::size_t axis);
Tensor mean_axis(const Tensor& t, std::size_t axis);

Tensor reshape(const Tensor& t, Shape shape);
Tensor concat_last(const Tensor& a, const Tensor& b);
Tensor slice_last(const Tensor& t, std::size_t start, std::size_t len);

Tensor exp(const Tensor& t);
// log clamps its argument at 1e-12; the gradient is zero in the clamped
// region.
Tensor log(const Tensor& t);
Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);
Tensor leaky_relu(const Tensor& t, double slope);
// Softmax over the last axis, numerically stabilized by row-max subtraction.
Tensor softmax(const Tensor& t);
Tensor clamp(const Tensor& t, double lo, double hi);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return add(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return sub(a, c); }
inline Tensor operator*(const Tensor& a, double c) { return mul(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return mul(a, c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// Non-differentiable helpers.
std::vector<std::size_t> argmax_last(const Tensor& t);
Tensor onehot(const std::vector<int>& labels, std::size_t classes);

}  // namespace lsrl
