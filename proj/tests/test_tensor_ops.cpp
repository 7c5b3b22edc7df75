#include <cmath>
#include <limits>

#include "doctest.h"
#include "lsrl/errors.hpp"
#include "lsrl/ops.hpp"
#include "lsrl/tensor.hpp"

using namespace lsrl;

TEST_CASE("matmul hand arithmetic") {
    Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
    Tensor b = Tensor::matrix({{1}, {1}});
    Tensor c = matmul(a, b);
    CHECK(c.shape() == Shape{2, 1});
    CHECK(c.at({0, 0}) == doctest::Approx(3.0));
    CHECK(c.at({1, 0}) == doctest::Approx(7.0));
}

TEST_CASE("matmul batch broadcast variants") {
    Tensor a = Tensor::from_data({2, 2, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    Tensor b = Tensor::from_data({3, 2}, {1, 0, 0, 1, 1, 1});

    Tensor c = matmul(a, b);  // batched x plain
    CHECK(c.shape() == Shape{2, 2, 2});
    CHECK(c.at({0, 0, 0}) == doctest::Approx(1 + 3));
    CHECK(c.at({1, 1, 1}) == doctest::Approx(11 + 12));

    Tensor m = Tensor::matrix({{1, 0}, {0, 2}});
    Tensor d = matmul(m, a);  // plain x batched
    CHECK(d.shape() == Shape{2, 2, 3});
    CHECK(d.at({1, 1, 0}) == doctest::Approx(20));

    Tensor bb = Tensor::from_data({2, 3, 2}, std::vector<double>(12, 1.0));
    Tensor e = matmul(a, bb);  // batched x batched
    CHECK(e.shape() == Shape{2, 2, 2});
    CHECK(e.at({0, 0, 0}) == doctest::Approx(6.0));
}

TEST_CASE("matmul shape errors name both shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({2, 3});
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2 x 3]"), ShapeError);
}

TEST_CASE("non-finite operands are rejected") {
    Tensor a = Tensor::from_data({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
    Tensor b = Tensor::from_data({2}, {1.0, 2.0});
    CHECK_THROWS_AS(add(a, b), NonFiniteError);
    CHECK_THROWS_AS(mul(b, a), NonFiniteError);
}

TEST_CASE("softmax symmetry and row sums") {
    Tensor x = Tensor::from_data({2}, {0.0, 0.0});
    Tensor y = softmax(x);
    CHECK(y.at({0}) == doctest::Approx(0.5));
    CHECK(y.at({1}) == doctest::Approx(0.5));

    Tensor z = Tensor::from_data({3, 4}, {1, -2, 0.5, 3, 100, 100, 100, 100, -50, 2, 7, 0});
    Tensor p = softmax(z);
    for (std::size_t r = 0; r < 3; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            const double v = p.at({r, c});
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("sigmoid(0) is one half") {
    CHECK(sigmoid(Tensor::scalar(0.0)).value() == doctest::Approx(0.5));
}

TEST_CASE("broadcast add over leading batch dim") {
    Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor bias = Tensor::from_data({3}, {10, 20, 30});
    Tensor y = add(x, bias);
    CHECK(y.at({0, 0}) == doctest::Approx(11));
    CHECK(y.at({1, 2}) == doctest::Approx(36));

    // incompatible non-suffix shape
    Tensor bad = Tensor::from_data({2}, {1, 2});
    CHECK_THROWS_AS(add(x, bad), ShapeError);
}

TEST_CASE("scalar tensor broadcasts everywhere") {
    Tensor x = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor g = Tensor::scalar(2.0);
    Tensor y = mul(x, g);
    CHECK(y.at({1, 1}) == doctest::Approx(8));
}

TEST_CASE("reductions") {
    Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(sum(x).value() == doctest::Approx(21));
    CHECK(mean(x).value() == doctest::Approx(3.5));

    Tensor s0 = sum_axis(x, 0);
    CHECK(s0.shape() == Shape{3});
    CHECK(s0.at({0}) == doctest::Approx(5));
    Tensor m1 = mean_axis(x, 1);
    CHECK(m1.shape() == Shape{2});
    CHECK(m1.at({1}) == doctest::Approx(5));
}

TEST_CASE("reshape, concat, slice") {
    Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor r = reshape(x, {3, 2});
    CHECK(r.at({2, 1}) == doctest::Approx(6));
    CHECK_THROWS_AS(reshape(x, {4, 2}), ShapeError);

    Tensor y = Tensor::from_data({2, 2}, {7, 8, 9, 10});
    Tensor c = concat_last(x, y);
    CHECK(c.shape() == Shape{2, 5});
    CHECK(c.at({0, 3}) == doctest::Approx(7));
    CHECK(c.at({1, 4}) == doctest::Approx(10));

    Tensor s = slice_last(c, 3, 2);
    CHECK(s.shape() == Shape{2, 2});
    CHECK(s.at({0, 0}) == doctest::Approx(7));
    CHECK_THROWS_AS(slice_last(c, 4, 2), ShapeError);
}

TEST_CASE("clamp and log floor") {
    Tensor x = Tensor::from_data({3}, {-5.0, 0.5, 5.0});
    Tensor y = clamp(x, 0.0, 1.0);
    CHECK(y.at({0}) == doctest::Approx(0.0));
    CHECK(y.at({1}) == doctest::Approx(0.5));
    CHECK(y.at({2}) == doctest::Approx(1.0));

    Tensor z = log(Tensor::from_data({2}, {0.0, 1.0}));
    CHECK(std::isfinite(z.at({0})));
    CHECK(z.at({0}) == doctest::Approx(std::log(1e-12)));
    CHECK(z.at({1}) == doctest::Approx(0.0));
}

TEST_CASE("transpose_last2") {
    Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor t = transpose_last2(x);
    CHECK(t.shape() == Shape{3, 2});
    CHECK(t.at({0, 1}) == doctest::Approx(4));
    CHECK(t.at({2, 0}) == doctest::Approx(3));
}

TEST_CASE("argmax and onehot") {
    Tensor x = Tensor::from_data({2, 3}, {1, 5, 2, 9, 0, 3});
    auto idx = argmax_last(x);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 0);

    Tensor oh = onehot({2, 0}, 3);
    CHECK(oh.at({0, 2}) == doctest::Approx(1.0));
    CHECK(oh.at({1, 0}) == doctest::Approx(1.0));
    CHECK(oh.at({0, 0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(onehot({3}, 3), ShapeError);
}
