#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pide/relu_net.hpp"
#include "pide/rng.hpp"
#include "test_support.hpp"

using namespace pide;
using namespace testutil;

TEST_CASE("eval: identity passes values through unchanged") {
    ReluNet id = identity_net(3);
    std::vector<double> x{1.0, -2.0, 0.0};
    auto y = id.eval(x);
    CHECK(y == x);
}

TEST_CASE("eval: two-layer 1d chain clips negatives at the hidden rho") {
    // W=[[1]],b=[0] twice: x -> rho(x) -> rho(x)*1.
    std::vector<double> w{1.0}, b{0.0};
    std::vector<AffineLayer> ls;
    ls.push_back(AffineLayer::from_dense(1, 1, w, b));
    ls.push_back(AffineLayer::from_dense(1, 1, w, b));
    ReluNet net(std::move(ls));
    CHECK(net.eval(std::vector<double>{-5.0})[0] == 0.0);
    CHECK(net.eval(std::vector<double>{2.5})[0] == 2.5);
}

TEST_CASE("eval: random 3-layer net matches the dense straight-line oracle") {
    Rng rng(12345);
    for (int rep = 0; rep < 50; ++rep) {
        DenseNet d = random_dense_net(rng, 3, 2, 3, 5);
        ReluNet net = to_relu(d);
        auto x = random_vec(rng, 3);
        auto got = net.eval(x);
        auto want = dense_eval(d, x);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(close_rel(got[i], want[i], 1e-12));
    }
}

TEST_CASE("eval: dimension mismatch raises") {
    ReluNet id = identity_net(3);
    CHECK_THROWS_AS(id.eval(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("size: identity with zero bias counts d entries") {
    CHECK(identity_net(4).size() == 4);
}

TEST_CASE("size: all-zero layer counts zero") {
    std::vector<double> w(4, 0.0), b(2, 0.0);
    ReluNet net({AffineLayer::from_dense(2, 2, w, b)});
    CHECK(net.size() == 0);
}

TEST_CASE("size: dense 2x2 plus nonzero bias counts six entries") {
    std::vector<double> w{1.0, 2.0, 3.0, 4.0}, b{0.5, -0.5};
    ReluNet net({AffineLayer::from_dense(2, 2, w, b)});
    CHECK(net.size() == 6);
}

TEST_CASE("size: invariant under appending explicit zero rows and columns") {
    Rng rng(777);
    DenseNet d = random_dense_net(rng, 2, 2, 3, 4);
    const std::size_t base = to_relu(d).size();
    // widen the last layer with a zero row, and the first with a zero column
    DenseLayer& first = d.layers.front();
    DenseLayer widened{first.rows, first.cols + 1, {}, first.b};
    widened.w.assign(first.rows * (first.cols + 1), 0.0);
    for (std::size_t r = 0; r < first.rows; ++r)
        for (std::size_t c = 0; c < first.cols; ++c)
            widened.w[r * widened.cols + c] = first.w[r * first.cols + c];
    DenseNet padded = d;
    padded.layers.front() = widened;
    CHECK(to_relu(padded).size() == base);
}

TEST_CASE("identity_net: scalar case") {
    ReluNet id = identity_net(1);
    CHECK(id.eval(std::vector<double>{7.0})[0] == 7.0);
    CHECK(id.size() == 1);
}

TEST_CASE("identity_net: bias entries count only when nonzero") {
    std::vector<double> bias{0.0, 1.0, 0.0};
    ReluNet id = identity_net(3, bias);
    CHECK(id.size() == 4);
    auto y = id.eval(std::vector<double>{1.0, 1.0, 1.0});
    CHECK(y == std::vector<double>{1.0, 2.0, 1.0});
}

TEST_CASE("identity_net: carries a Gaussian increment in the bias") {
    // the step net form: x -> x + Z*sqrt(dt)
    Rng rng(9);
    std::vector<double> z{rng.normal(), rng.normal()};
    const double sdt = std::sqrt(0.25);
    std::vector<double> bias{z[0] * sdt, z[1] * sdt};
    ReluNet step = identity_net(2, bias);
    std::vector<double> x{0.3, -0.7};
    auto y = step.eval(x);
    CHECK(y[0] == x[0] + bias[0]);
    CHECK(y[1] == x[1] + bias[1]);
}

TEST_CASE("compose: identity pair stays the identity within the size budget") {
    ReluNet c = compose(identity_net(2), identity_net(2));
    std::vector<double> x{-1.5, 2.0};
    auto y = c.eval(x);
    CHECK(close_rel(y[0], x[0], 1e-15));
    CHECK(close_rel(y[1], x[1], 1e-15));
    CHECK(c.size() <= 2 * 2 + 2 * 2);
}

TEST_CASE("compose: zero-output inner yields the constant outer(0)") {
    std::vector<double> w(4, 0.0), b(2, 0.0);
    ReluNet zero({AffineLayer::from_dense(2, 2, w, b)});
    Rng rng(31);
    DenseNet d = random_dense_net(rng, 2, 2, 3, 4);
    ReluNet outer = to_relu(d);
    auto expect = dense_eval(d, std::vector<double>{0.0, 0.0});
    ReluNet c = compose(outer, zero);
    for (int rep = 0; rep < 5; ++rep) {
        auto y = c.eval(random_vec(rng, 2));
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(close_rel(y[i], expect[i], 1e-12));
    }
}

TEST_CASE("compose: random pairs match nested evaluation and the size budget") {
    Rng rng(20240501);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t mid = 1 + rng.next_u64() % 4;
        DenseNet di = random_dense_net(rng, 2, mid);
        DenseNet dout = random_dense_net(rng, mid, 2);
        ReluNet inner = to_relu(di), outer = to_relu(dout);
        ReluNet c = compose(outer, inner);
        CHECK(c.size() <= 2 * outer.size() + 2 * inner.size());
        for (int k = 0; k < 5; ++k) {
            auto x = random_vec(rng, 2);
            auto nested = outer.eval(inner.eval(x));
            auto direct = c.eval(x);
            for (std::size_t i = 0; i < nested.size(); ++i)
                CHECK(close_rel(direct[i], nested[i], 1e-9));
        }
    }
}

TEST_CASE("compose: dimension mismatch raises") {
    CHECK_THROWS_AS(compose(identity_net(3), identity_net(2)), std::invalid_argument);
}

TEST_CASE("linear_combine: singleton with unit coefficient is the same function") {
    Rng rng(55);
    DenseNet d = random_dense_net(rng, 3, 2);
    ReluNet net = to_relu(d);
    std::vector<double> one{1.0};
    ReluNet c = linear_combine(std::vector<ReluNet>{net}, one);
    for (int k = 0; k < 10; ++k) {
        auto x = random_vec(rng, 3);
        CHECK(net.eval(x) == c.eval(x));
    }
    CHECK(c.size() == net.size());
}

TEST_CASE("linear_combine: cancellation produces the zero function with zero size") {
    std::vector<ReluNet> nets{identity_net(2), identity_net(2)};
    std::vector<double> coeffs{1.0, -1.0};
    ReluNet z = linear_combine(nets, coeffs);
    CHECK(z.size() == 0);
    auto y = z.eval(std::vector<double>{3.0, -4.0});
    CHECK(y == std::vector<double>{0.0, 0.0});
}

TEST_CASE("linear_combine: random triples match direct summed evaluation") {
    Rng rng(4242);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<DenseNet> ds;
        std::vector<ReluNet> nets;
        for (int i = 0; i < 3; ++i) {
            ds.push_back(random_dense_net(rng, 2, 2));
            nets.push_back(to_relu(ds.back()));
        }
        std::vector<double> a{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        ReluNet c = linear_combine(nets, a);
        for (int k = 0; k < 5; ++k) {
            auto x = random_vec(rng, 2);
            std::vector<double> want(2, 0.0);
            for (int i = 0; i < 3; ++i) {
                auto yi = dense_eval(ds[i], x);
                for (int j = 0; j < 2; ++j) want[j] += a[i] * yi[j];
            }
            auto got = c.eval(x);
            for (int j = 0; j < 2; ++j) CHECK(close_rel(got[j], want[j], 1e-9));
        }
    }
}

TEST_CASE("linear_combine: equal-depth sums respect the merged-output size allowance") {
    Rng rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t depth = 2 + rng.next_u64() % 3;
        std::vector<ReluNet> nets;
        std::size_t total = 0;
        for (int i = 0; i < 4; ++i) {
            DenseNet d = random_dense_net_depth(rng, 3, 2, depth, 5);
            nets.push_back(to_relu(d));
            total += nets.back().size();
        }
        std::vector<double> a{1.0, 0.5, -0.25, 2.0};
        ReluNet c = linear_combine(nets, a);
        CHECK(c.size() <= total + c.output_dim());
    }
}

TEST_CASE("linear_combine: mixed depths still evaluate to the exact sum") {
    Rng rng(2718);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<DenseNet> ds;
        std::vector<ReluNet> nets;
        std::vector<double> a;
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        for (int i = 0; i < n; ++i) {
            ds.push_back(random_dense_net(rng, 2, 3, 4, 4));
            nets.push_back(to_relu(ds.back()));
            a.push_back(rng.uniform(-1.5, 1.5));
        }
        ReluNet c = linear_combine(nets, a);
        for (int k = 0; k < 5; ++k) {
            auto x = random_vec(rng, 2);
            std::vector<double> want(3, 0.0);
            for (int i = 0; i < n; ++i) {
                auto yi = dense_eval(ds[i], x);
                for (int j = 0; j < 3; ++j) want[j] += a[i] * yi[j];
            }
            auto got = c.eval(x);
            for (int j = 0; j < 3; ++j) CHECK(close_rel(got[j], want[j], 1e-9));
        }
    }
}

TEST_CASE("linear_combine: empty list raises") {
    std::vector<ReluNet> none;
    std::vector<double> coeffs;
    CHECK_THROWS_AS(linear_combine(none, coeffs), std::invalid_argument);
}

TEST_CASE("pair_input_net: bookkeeping and evaluation against concatenation") {
    Rng rng(303);
    DenseNet d = random_dense_net(rng, 3, 2);
    ReluNet net = to_relu(d);
    ReluNet padded = pair_input_net(net);
    CHECK(padded.input_dim() == 4);
    CHECK(padded.size() == net.size());
    for (int k = 0; k < 10; ++k) {
        auto x = random_vec(rng, 3);
        std::vector<double> tx{rng.uniform(0, 1), x[0], x[1], x[2]};
        CHECK(padded.eval(tx) == net.eval(x));
    }
}

TEST_CASE("property: positive homogeneity for bias-free nets") {
    Rng rng(606);
    for (int rep = 0; rep < 40; ++rep) {
        DenseNet d = random_dense_net(rng, 2, 2);
        for (auto& L : d.layers)
            for (auto& b : L.b) b = 0.0;
        ReluNet net = to_relu(d);
        auto x = random_vec(rng, 2);
        const double c = rng.uniform(0.1, 4.0);
        std::vector<double> cx{c * x[0], c * x[1]};
        auto y = net.eval(x);
        auto yc = net.eval(cx);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(close_rel(yc[i], c * y[i], 1e-9));
    }
}

TEST_CASE("serialization: hex round trip is exact and deterministic") {
    Rng rng(808);
    DenseNet d = random_dense_net(rng, 3, 2);
    ReluNet net = to_relu(d);
    std::ostringstream s1;
    net.save(s1);
    std::istringstream in(s1.str());
    ReluNet back = ReluNet::load(in);
    CHECK(back.size() == net.size());
    for (int k = 0; k < 10; ++k) {
        auto x = random_vec(rng, 3);
        CHECK(back.eval(x) == net.eval(x));  // bitwise: same arithmetic
    }
    std::ostringstream s2;
    back.save(s2);
    CHECK(s1.str() == s2.str());
}
