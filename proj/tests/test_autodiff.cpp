#include <catch2/catch_amalgamated.hpp>

#include "revsent/model.hpp"
#include "revsent/optim.hpp"
#include "revsent/tensor.hpp"

using namespace revsent;
using Catch::Approx;

TEST_CASE("relu forward and mask") {
    Tensor x = Tensor::from({-1, 2}, {2}, true);
    Tensor y = relu(x);
    CHECK(y.data()[0] == real(0));
    CHECK(y.data()[1] == real(2));
    backward(sum_all(y));
    CHECK(x.grad()[0] == real(0));
    CHECK(x.grad()[1] == real(1));
}

TEST_CASE("max_over_time takes per-column max") {
    Tensor x = Tensor::from({1, 3, 2, 2}, {2, 2});
    Tensor y = max_over_time(x);
    CHECK(y.data()[0] == real(2));
    CHECK(y.data()[1] == real(3));
}

TEST_CASE("max_over_time tie routes gradient to the first index") {
    Tensor x = Tensor::from({5, 5, 5}, {3, 1}, true);
    backward(sum_all(max_over_time(x)));
    CHECK(x.grad()[0] == real(1));
    CHECK(x.grad()[1] == real(0));
    CHECK(x.grad()[2] == real(0));
}

TEST_CASE("softmax of equal logits is uniform and shift-invariant") {
    Tensor x = Tensor::from({0, 0, 0}, {3});
    auto y = softmax(x).data();
    for (real v : y) CHECK(double(v) == Approx(1.0 / 3));
    Rng rng(3);
    Tensor a = Tensor::uniform({2, 5}, real(2), rng, false);
    Tensor shifted = add(a, Tensor::full({2, 5}, real(7.5)));
    auto p1 = softmax(a).data();
    auto p2 = softmax(shifted).data();
    double sum_row0 = 0;
    for (int j = 0; j < 5; ++j) {
        CHECK(double(p1[std::size_t(j)]) == Approx(double(p2[std::size_t(j)])).margin(1e-6));
        sum_row0 += double(p1[std::size_t(j)]);
    }
    CHECK(sum_row0 == Approx(1.0).margin(1e-6));
}

TEST_CASE("gradient accumulates when a leaf feeds two branches") {
    Tensor w = Tensor::from({2, 3}, {2}, true);
    Tensor x = Tensor::from({1, 1}, {2});
    // loss = sum(w*x) + sum(w*w)
    backward(add(sum_all(mul(w, x)), sum_all(mul(w, w))));
    CHECK(double(w.grad()[0]) == Approx(1 + 4));
    CHECK(double(w.grad()[1]) == Approx(1 + 6));
}

TEST_CASE("backward rejects non-scalar loss") {
    Tensor x = Tensor::from({1, 2}, {2}, true);
    CHECK_THROWS_AS(backward(mul(x, x)), ShapeError);
}

TEST_CASE("shape mismatches report both shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4, 2});
    CHECK_THROWS_WITH(matmul(a, b), Catch::Matchers::ContainsSubstring("[2,3]") &&
                                        Catch::Matchers::ContainsSubstring("[4,2]"));
    CHECK_THROWS_AS(mul(a, b), ShapeError);
    CHECK_THROWS_AS(add(a, b), ShapeError);
}

TEST_CASE("dropout p=0 is identity; fixed seed deterministic; inverted scaling") {
    Rng r0(9);
    Tensor x = Tensor::uniform({10, 10}, real(1), r0, false);
    Rng d1(5);
    CHECK(dropout(x, real(0), d1).data() == x.data());
    Rng d2(5), d3(5);
    CHECK(dropout(x, real(0.5), d2).data() == dropout(x, real(0.5), d3).data());
    // surviving entries are scaled by 1/(1-p)
    Rng d4(5);
    auto y = dropout(x, real(0.5), d4).data();
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK((y[i] == real(0) || double(y[i]) == Approx(2.0 * double(x.data()[i]))));
}

TEST_CASE("cross entropy values") {
    // uniform logits over C classes -> ln C
    Tensor u = Tensor::from({0.5, 0.5, 0.5, 0.5}, {1, 4});
    CHECK(double(cross_entropy(u, {2}).item()) == Approx(std::log(4.0)).margin(1e-6));
    // logits [2, 0], true class 0 -> ln(1 + e^-2)
    Tensor l = Tensor::from({2, 0}, {1, 2});
    CHECK(double(cross_entropy(l, {0}).item()) == Approx(std::log(1 + std::exp(-2.0))).margin(1e-6));
    CHECK_THROWS_AS(cross_entropy(l, {2}), RevsentError);
}

TEST_CASE("mse of equal tensors is zero") {
    Tensor p = Tensor::from({1, 2, 3}, {3});
    CHECK(double(mse(p, {1, 2, 3}).item()) == Approx(0.0).margin(1e-12));
}

TEST_CASE("adam first step approximates lr * sign(g)") {
    Tensor theta = Tensor::zeros({1}, true);
    Adam opt({.lr = real(1e-3)});
    opt.attach({theta});
    theta.grad()[0] = real(1);
    opt.step();
    CHECK(double(theta.data()[0]) == Approx(-1e-3).epsilon(0.01));
}

TEST_CASE("adam with zero gradient and no decay leaves params unchanged") {
    Tensor theta = Tensor::from({0.5, -0.25}, {2}, true);
    Adam opt;
    opt.attach({theta});
    theta.grad();  // zero-initialized
    opt.step();
    CHECK(theta.data()[0] == real(0.5));
    CHECK(theta.data()[1] == real(-0.25));
}

TEST_CASE("adam aborts on non-finite gradient") {
    Tensor theta = Tensor::zeros({1}, true);
    Adam opt;
    opt.attach({theta});
    theta.grad()[0] = std::numeric_limits<real>::quiet_NaN();
    CHECK_THROWS_AS(opt.step(), RevsentError);
}

TEST_CASE("adam runs are bitwise deterministic") {
    auto run = [] {
        Rng rng(11);
        Tensor w = Tensor::uniform({4, 4}, real(1), rng, true);
        Tensor x = Tensor::uniform({4, 4}, real(1), rng, false);
        Adam opt({.lr = real(0.01)});
        opt.attach({w});
        for (int i = 0; i < 25; ++i) {
            opt.zero_grad();
            backward(mean_all(mul(sub(matmul(w, x), x), sub(matmul(w, x), x))));
            opt.step();
        }
        return w.data();
    };
    CHECK(run() == run());
}

TEST_CASE("conv1d plus max_over_time has fixed output size") {
    Rng rng(2);
    for (int t : {3, 7, 20}) {
        Tensor x = Tensor::uniform({t, 4}, real(1), rng, false);
        Tensor w = Tensor::uniform({5, 12}, real(1), rng, false);
        Tensor out = max_over_time(conv1d(x, w, 3));
        REQUIRE(out.shape() == Shape{5});
    }
    Tensor shorty = Tensor::zeros({2, 4});
    Tensor w = Tensor::zeros({5, 12});
    CHECK_THROWS_AS(conv1d(shorty, w, 3), ShapeError);
}

TEST_CASE("checkpoint round-trips parameters and meta") {
    Rng rng(4);
    Checkpoint c;
    c.add_meta("kind", "unit-test");
    c.params.emplace_back("w", Tensor::uniform({3, 2}, real(1), rng, true));
    c.params.emplace_back("b", Tensor::from({1.5, -2.5}, {2}, true));
    save_checkpoint(c, "ckpt_test");
    Checkpoint back = load_checkpoint("ckpt_test");
    CHECK(back.meta_value("kind") == "unit-test");
    REQUIRE(back.params.size() == 2);
    CHECK(back.params[0].first == "w");
    CHECK(back.param("w").shape() == Shape{3, 2});
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(double(back.param("w").data()[i]) ==
              Approx(double(c.param("w").data()[i])).margin(1e-6));
    CHECK(back.param("b").data()[1] == real(-2.5));
}
