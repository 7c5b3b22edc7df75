#include "lsrl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <utility>

#include "lsrl/errors.hpp"
#include "lsrl/tape.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lsrl {

namespace {

constexpr double kLogFloor = 1e-12;

// Work sizes below this run single-threaded; above it, matmul parallelizes
// over independent output rows. Each row is reduced in a fixed sequential
// order, so results are bitwise identical for any thread count.
constexpr std::size_t kParallelFlops = 200000;

void check_finite(const char* op, const Tensor& t) {
    if (!all_finite(t.data())) {
        throw NonFiniteError(std::string(op) + ": operand contains NaN/Inf, shape " +
                             shape_str(t.shape()));
    }
}

bool tracing(const Tensor& a) {
    return Tape::current() != nullptr && a.requires_grad();
}
bool tracing(const Tensor& a, const Tensor& b) {
    return Tape::current() != nullptr && (a.requires_grad() || b.requires_grad());
}

Tensor make_output(Shape shape, std::vector<double> data, bool traced) {
    Tensor out = Tensor::from_data(std::move(shape), std::move(data), false);
    out.impl()->requires_grad = traced;
    return out;
}

void record(std::vector<std::shared_ptr<TensorImpl>> inputs, const Tensor& out,
            std::function<void()> backward) {
    Tape::current()->record({std::move(inputs), out.impl(), std::move(backward)});
}

// ---- matmul kernels (all accumulate into C) ----
// Row i of C depends only on fixed-order reductions, so the parallel paths
// are bitwise identical to the serial ones for any thread count. Small
// products take the pragma-free path; entering an OpenMP region costs more
// than these kernels do.

inline void mm_nn_row(const double* a_row, const double* B, double* c_row, std::size_t k,
                      std::size_t n) {
    for (std::size_t l = 0; l < k; ++l) {
        const double a = a_row[l];
        const double* b_row = B + l * n;
        for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
    }
}

// C[m x n] += A[m x k] * B[k x n]
void mm_nn_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
               std::size_t n) {
    if (m > 1 && m * k * n >= kParallelFlops) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
            mm_nn_row(A + i * k, B, C + i * n, k, n);
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) mm_nn_row(A + i * k, B, C + i * n, k, n);
    }
}

inline void mm_nt_row(const double* a_row, const double* B, double* c_row, std::size_t n,
                      std::size_t k2) {
    for (std::size_t j2 = 0; j2 < k2; ++j2) {
        const double* b_row = B + j2 * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a_row[j] * b_row[j];
        c_row[j2] += s;
    }
}

// C[m x k2] += A[m x n] * B[k2 x n]^T
void mm_nt_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t n,
               std::size_t k2) {
    if (m > 1 && m * n * k2 >= kParallelFlops) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
            mm_nt_row(A + i * n, B, C + i * k2, n, k2);
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) mm_nt_row(A + i * n, B, C + i * k2, n, k2);
    }
}

// C[k x n] += A[m x k]^T * B[m x n]
void mm_tn_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
               std::size_t n) {
    if (k > 1 && m * k * n >= kParallelFlops) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(k); ++l) {
            double* c_row = C + l * n;
            for (std::size_t i = 0; i < m; ++i) {
                const double a = A[i * k + l];
                const double* b_row = B + i * n;
                for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
            }
        }
    } else {
        for (std::size_t l = 0; l < k; ++l) {
            double* c_row = C + l * n;
            for (std::size_t i = 0; i < m; ++i) {
                const double a = A[i * k + l];
                const double* b_row = B + i * n;
                for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
            }
        }
    }
}

struct MatmulDims {
    std::size_t batch;  // 1 when both operands are rank-2
    std::size_t m, k, n;
    bool a_batched, b_batched;
};

MatmulDims matmul_dims(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    auto fail = [&] {
        throw ShapeError("matmul: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
    };
    if (sa.size() < 2 || sa.size() > 3 || sb.size() < 2 || sb.size() > 3) fail();
    MatmulDims d{};
    d.a_batched = sa.size() == 3;
    d.b_batched = sb.size() == 3;
    d.m = sa[sa.size() - 2];
    d.k = sa[sa.size() - 1];
    const std::size_t bk = sb[sb.size() - 2];
    d.n = sb[sb.size() - 1];
    if (bk != d.k) fail();
    if (d.a_batched && d.b_batched && sa[0] != sb[0]) fail();
    d.batch = d.a_batched ? sa[0] : (d.b_batched ? sb[0] : 1);
    return d;
}

// ---- broadcasting for elementwise binary ops ----

bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    for (std::size_t i = 0; i < small.size(); ++i) {
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    }
    return true;
}

// 0: equal shapes, 1: b broadcasts over a, 2: a broadcasts over b
int broadcast_mode(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return 0;
    if (b.size() == 1 || is_suffix(b.shape(), a.shape())) return 1;
    if (a.size() == 1 || is_suffix(a.shape(), b.shape())) return 2;
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
    return -1;
}

template <typename FwdFn, typename DaFn, typename DbFn>
Tensor elementwise_binary(const char* name, const Tensor& a, const Tensor& b, FwdFn fwd, DaFn dfa,
                          DbFn dfb) {
    check_finite(name, a);
    check_finite(name, b);
    const int mode = broadcast_mode(name, a, b);
    const Tensor& big = (mode == 2) ? b : a;
    const Tensor& small = (mode == 2) ? a : b;
    const std::size_t N = big.size();
    const std::size_t S = small.size();

    std::vector<double> out(N);
    const auto& ad = a.data();
    const auto& bd = b.data();
    if (mode == 0) {
        for (std::size_t i = 0; i < N; ++i) out[i] = fwd(ad[i], bd[i]);
    } else if (mode == 1) {
        for (std::size_t i = 0; i < N; ++i) out[i] = fwd(ad[i], bd[i % S]);
    } else {
        for (std::size_t i = 0; i < N; ++i) out[i] = fwd(ad[i % S], bd[i]);
    }

    const bool traced = tracing(a, b);
    Tensor y = make_output(big.shape(), std::move(out), traced);
    if (traced) {
        auto ai = a.impl(), bi = b.impl(), yi = y.impl();
        record({ai, bi}, y, [ai, bi, yi, mode, S, dfa, dfb] {
            const auto& dy = yi->grad;
            const std::size_t N2 = dy.size();
            if (ai->requires_grad) {
                ai->ensure_grad();
                if (mode == 2) {
                    for (std::size_t i = 0; i < N2; ++i)
                        ai->grad[i % S] += dfa(ai->data[i % S], bi->data[i], dy[i]);
                } else if (mode == 1) {
                    for (std::size_t i = 0; i < N2; ++i)
                        ai->grad[i] += dfa(ai->data[i], bi->data[i % S], dy[i]);
                } else {
                    for (std::size_t i = 0; i < N2; ++i)
                        ai->grad[i] += dfa(ai->data[i], bi->data[i], dy[i]);
                }
            }
            if (bi->requires_grad) {
                bi->ensure_grad();
                if (mode == 1) {
                    for (std::size_t i = 0; i < N2; ++i)
                        bi->grad[i % S] += dfb(ai->data[i], bi->data[i % S], dy[i]);
                } else if (mode == 2) {
                    for (std::size_t i = 0; i < N2; ++i)
                        bi->grad[i] += dfb(ai->data[i % S], bi->data[i], dy[i]);
                } else {
                    for (std::size_t i = 0; i < N2; ++i)
                        bi->grad[i] += dfb(ai->data[i], bi->data[i], dy[i]);
                }
            }
        });
    }
    return y;
}

template <typename FwdFn, typename GradFn>
Tensor elementwise_unary(const char* name, const Tensor& a, FwdFn fwd, GradFn grad_fn) {
    check_finite(name, a);
    const std::size_t N = a.size();
    std::vector<double> out(N);
    const auto& ad = a.data();
    for (std::size_t i = 0; i < N; ++i) out[i] = fwd(ad[i]);

    const bool traced = tracing(a);
    Tensor y = make_output(a.shape(), std::move(out), traced);
    if (traced) {
        auto ai = a.impl(), yi = y.impl();
        record({ai}, y, [ai, yi, grad_fn] {
            if (!ai->requires_grad) return;
            ai->ensure_grad();
            const auto& dy = yi->grad;
            for (std::size_t i = 0; i < dy.size(); ++i)
                ai->grad[i] += grad_fn(ai->data[i], yi->data[i], dy[i]);
        });
    }
    return y;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_finite("matmul", a);
    check_finite("matmul", b);
    const MatmulDims d = matmul_dims(a, b);

    Shape out_shape;
    if (d.a_batched || d.b_batched) out_shape = {d.batch, d.m, d.n};
    else out_shape = {d.m, d.n};
    std::vector<double> out(d.batch * d.m * d.n, 0.0);

    const double* A = a.data().data();
    const double* B = b.data().data();
    for (std::size_t bi = 0; bi < d.batch; ++bi) {
        const double* Ab = A + (d.a_batched ? bi * d.m * d.k : 0);
        const double* Bb = B + (d.b_batched ? bi * d.k * d.n : 0);
        mm_nn_acc(Ab, Bb, out.data() + bi * d.m * d.n, d.m, d.k, d.n);
    }

    const bool traced = tracing(a, b);
    Tensor y = make_output(std::move(out_shape), std::move(out), traced);
    if (traced) {
        auto ai = a.impl(), bi_ = b.impl(), yi = y.impl();
        record({ai, bi_}, y, [ai, bi_, yi, d] {
            const double* dY = yi->grad.data();
            if (ai->requires_grad) {
                ai->ensure_grad();
                // dA = dY * B^T
                for (std::size_t bb = 0; bb < d.batch; ++bb) {
                    const double* dYb = dY + bb * d.m * d.n;
                    const double* Bb = bi_->data.data() + (d.b_batched ? bb * d.k * d.n : 0);
                    double* dAb = ai->grad.data() + (d.a_batched ? bb * d.m * d.k : 0);
                    mm_nt_acc(dYb, Bb, dAb, d.m, d.n, d.k);
                }
            }
            if (bi_->requires_grad) {
                bi_->ensure_grad();
                // dB = A^T * dY
                for (std::size_t bb = 0; bb < d.batch; ++bb) {
                    const double* Ab = ai->data.data() + (d.a_batched ? bb * d.m * d.k : 0);
                    const double* dYb = dY + bb * d.m * d.n;
                    double* dBb = bi_->grad.data() + (d.b_batched ? bb * d.k * d.n : 0);
                    mm_tn_acc(Ab, dYb, dBb, d.m, d.k, d.n);
                }
            }
        });
    }
    return y;
}

Tensor transpose_last2(const Tensor& t) {
    check_finite("transpose", t);
    const Shape& s = t.shape();
    if (s.size() < 2) {
        throw ShapeError("transpose: needs rank >= 2, got " + shape_str(s));
    }
    const std::size_t r = s[s.size() - 2], c = s[s.size() - 1];
    const std::size_t batch = t.size() / (r * c);
    Shape out_shape = s;
    std::swap(out_shape[s.size() - 2], out_shape[s.size() - 1]);

    std::vector<double> out(t.size());
    const auto& td = t.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* src = td.data() + b * r * c;
        double* dst = out.data() + b * r * c;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
    }

    const bool traced = tracing(t);
    Tensor y = make_output(std::move(out_shape), std::move(out), traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi, batch, r, c] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            for (std::size_t b = 0; b < batch; ++b) {
                const double* dy = yi->grad.data() + b * r * c;  // [c x r]
                double* dt = ti->grad.data() + b * r * c;        // [r x c]
                for (std::size_t j = 0; j < c; ++j)
                    for (std::size_t i = 0; i < r; ++i) dt[i * c + j] += dy[j * r + i];
            }
        });
    }
    return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double, double dy) { return dy; }, [](double, double, double dy) { return dy; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double, double dy) { return dy; },
        [](double, double, double dy) { return -dy; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double, double y, double dy) { return dy * y; },
        [](double x, double, double dy) { return dy * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "div", a, b, [](double x, double y) { return x / y; },
        [](double, double y, double dy) { return dy / y; },
        [](double x, double y, double dy) { return -dy * x / (y * y); });
}

Tensor add(const Tensor& a, double c) {
    return elementwise_unary(
        "add_scalar", a, [c](double x) { return x + c; },
        [](double, double, double dy) { return dy; });
}

Tensor sub(const Tensor& a, double c) { return add(a, -c); }

Tensor sub(double c, const Tensor& a) {
    return elementwise_unary(
        "rsub_scalar", a, [c](double x) { return c - x; },
        [](double, double, double dy) { return -dy; });
}

Tensor mul(const Tensor& a, double c) {
    return elementwise_unary(
        "mul_scalar", a, [c](double x) { return x * c; },
        [c](double, double, double dy) { return dy * c; });
}

Tensor div(const Tensor& a, double c) { return mul(a, 1.0 / c); }

Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor sum(const Tensor& t) {
    check_finite("sum", t);
    double s = 0.0;
    for (double x : t.data()) s += x;
    const bool traced = tracing(t);
    Tensor y = make_output({1}, {s}, traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            const double dy = yi->grad[0];
            for (double& g : ti->grad) g += dy;
        });
    }
    return y;
}

Tensor mean(const Tensor& t) {
    check_finite("mean", t);
    double s = 0.0;
    for (double x : t.data()) s += x;
    const double inv_n = 1.0 / static_cast<double>(t.size());
    const bool traced = tracing(t);
    Tensor y = make_output({1}, {s * inv_n}, traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi, inv_n] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            const double dy = yi->grad[0] * inv_n;
            for (double& g : ti->grad) g += dy;
        });
    }
    return y;
}

namespace {

Tensor reduce_axis(const char* name, const Tensor& t, std::size_t axis, bool take_mean) {
    check_finite(name, t);
    const Shape& s = t.shape();
    if (axis >= s.size()) {
        throw ShapeError(std::string(name) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_str(s));
    }
    const std::size_t alen = s[axis];
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];

    Shape out_shape;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != axis) out_shape.push_back(s[i]);
    if (out_shape.empty()) out_shape = {1};

    const double scale = take_mean ? 1.0 / static_cast<double>(alen) : 1.0;
    std::vector<double> out(outer * inner, 0.0);
    const auto& td = t.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t a = 0; a < alen; ++a)
            for (std::size_t j = 0; j < inner; ++j)
                out[o * inner + j] += td[(o * alen + a) * inner + j];
    if (take_mean)
        for (double& x : out) x *= scale;

    const bool traced = tracing(t);
    Tensor y = make_output(std::move(out_shape), std::move(out), traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi, outer, alen, inner, scale] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t a = 0; a < alen; ++a)
                    for (std::size_t j = 0; j < inner; ++j)
                        ti->grad[(o * alen + a) * inner + j] += yi->grad[o * inner + j] * scale;
        });
    }
    return y;
}

}  // namespace

Tensor sum_axis(const Tensor& t, std::size_t axis) { return reduce_axis("sum_axis", t, axis, false); }
Tensor mean_axis(const Tensor& t, std::size_t axis) { return reduce_axis("mean_axis", t, axis, true); }

Tensor reshape(const Tensor& t, Shape shape) {
    check_finite("reshape", t);
    if (shape_numel(shape) != t.size()) {
        throw ShapeError("reshape: cannot view " + shape_str(t.shape()) + " as " +
                         shape_str(shape));
    }
    const bool traced = tracing(t);
    Tensor y = make_output(std::move(shape), t.data(), traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            for (std::size_t i = 0; i < yi->grad.size(); ++i) ti->grad[i] += yi->grad[i];
        });
    }
    return y;
}

Tensor concat_last(const Tensor& a, const Tensor& b) {
    check_finite("concat", a);
    check_finite("concat", b);
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    bool ok = sa.size() == sb.size() && !sa.empty();
    if (ok)
        for (std::size_t i = 0; i + 1 < sa.size(); ++i) ok = ok && sa[i] == sb[i];
    if (!ok) {
        throw ShapeError("concat: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
    }
    const std::size_t la = sa.back(), lb = sb.back();
    const std::size_t rows = a.size() / la;
    Shape out_shape = sa;
    out_shape.back() = la + lb;

    std::vector<double> out(rows * (la + lb));
    for (std::size_t r = 0; r < rows; ++r) {
        std::memcpy(out.data() + r * (la + lb), a.data().data() + r * la, la * sizeof(double));
        std::memcpy(out.data() + r * (la + lb) + la, b.data().data() + r * lb,
                    lb * sizeof(double));
    }

    const bool traced = tracing(a, b);
    Tensor y = make_output(std::move(out_shape), std::move(out), traced);
    if (traced) {
        auto ai = a.impl(), bi = b.impl(), yi = y.impl();
        record({ai, bi}, y, [ai, bi, yi, rows, la, lb] {
            if (ai->requires_grad) {
                ai->ensure_grad();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < la; ++j)
                        ai->grad[r * la + j] += yi->grad[r * (la + lb) + j];
            }
            if (bi->requires_grad) {
                bi->ensure_grad();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < lb; ++j)
                        bi->grad[r * lb + j] += yi->grad[r * (la + lb) + la + j];
            }
        });
    }
    return y;
}

Tensor slice_last(const Tensor& t, std::size_t start, std::size_t len) {
    check_finite("slice", t);
    const Shape& s = t.shape();
    if (s.empty() || len == 0 || start + len > s.back()) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") invalid for " + shape_str(s));
    }
    const std::size_t last = s.back();
    const std::size_t rows = t.size() / last;
    Shape out_shape = s;
    out_shape.back() = len;

    std::vector<double> out(rows * len);
    for (std::size_t r = 0; r < rows; ++r)
        std::memcpy(out.data() + r * len, t.data().data() + r * last + start,
                    len * sizeof(double));

    const bool traced = tracing(t);
    Tensor y = make_output(std::move(out_shape), std::move(out), traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi, rows, last, start, len] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < len; ++j)
                    ti->grad[r * last + start + j] += yi->grad[r * len + j];
        });
    }
    return y;
}

Tensor exp(const Tensor& t) {
    return elementwise_unary(
        "exp", t, [](double x) { return std::exp(x); },
        [](double, double y, double dy) { return dy * y; });
}

Tensor log(const Tensor& t) {
    return elementwise_unary(
        "log", t, [](double x) { return std::log(std::max(x, kLogFloor)); },
        [](double x, double, double dy) { return x >= kLogFloor ? dy / x : 0.0; });
}

Tensor tanh(const Tensor& t) {
    return elementwise_unary(
        "tanh", t, [](double x) { return std::tanh(x); },
        [](double, double y, double dy) { return dy * (1.0 - y * y); });
}

Tensor sigmoid(const Tensor& t) {
    return elementwise_unary(
        "sigmoid", t,
        [](double x) {
            if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y, double dy) { return dy * y * (1.0 - y); });
}

Tensor leaky_relu(const Tensor& t, double slope) {
    return elementwise_unary(
        "leaky_relu", t, [slope](double x) { return x > 0 ? x : slope * x; },
        [slope](double x, double, double dy) { return x > 0 ? dy : slope * dy; });
}

Tensor softmax(const Tensor& t) {
    check_finite("softmax", t);
    const Shape& s = t.shape();
    if (s.empty()) throw ShapeError("softmax: rank-0 input");
    const std::size_t cols = s.back();
    const std::size_t rows = t.size() / cols;

    std::vector<double> out(t.size());
    const auto& td = t.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = td.data() + r * cols;
        double* y = out.data() + r * cols;
        double mx = x[0];
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        const double inv = 1.0 / sum;
        for (std::size_t j = 0; j < cols; ++j) y[j] *= inv;
    }

    const bool traced = tracing(t);
    Tensor y = make_output(s, std::move(out), traced);
    if (traced) {
        auto ti = t.impl(), yi = y.impl();
        record({ti}, y, [ti, yi, rows, cols] {
            if (!ti->requires_grad) return;
            ti->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* p = yi->data.data() + r * cols;
                const double* dy = yi->grad.data() + r * cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j) dot += dy[j] * p[j];
                double* dx = ti->grad.data() + r * cols;
                for (std::size_t j = 0; j < cols; ++j) dx[j] += p[j] * (dy[j] - dot);
            }
        });
    }
    return y;
}

Tensor clamp(const Tensor& t, double lo, double hi) {
    return elementwise_unary(
        "clamp", t, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
        [lo, hi](double x, double, double dy) { return (x > lo && x < hi) ? dy : 0.0; });
}

std::vector<std::size_t> argmax_last(const Tensor& t) {
    const std::size_t cols = t.shape().back();
    const std::size_t rows = t.size() / cols;
    std::vector<std::size_t> out(rows);
    const auto& td = t.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = td.data() + r * cols;
        std::size_t best = 0;
        for (std::size_t j = 1; j < cols; ++j)
            if (x[j] > x[best]) best = j;
        out[r] = best;
    }
    return out;
}

Tensor onehot(const std::vector<int>& labels, std::size_t classes) {
    std::vector<double> data(labels.size() * classes, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw ShapeError("onehot: label " + std::to_string(labels[i]) + " out of range 0.." +
                             std::to_string(classes - 1));
        }
        data[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return Tensor::from_data({labels.size(), classes}, std::move(data));
}

}  // namespace lsrl
