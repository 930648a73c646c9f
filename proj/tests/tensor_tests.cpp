#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sgm/gradcheck.hpp"
#include "sgm/params.hpp"
#include "sgm/rng.hpp"
#include "sgm/tape.hpp"

using namespace sgm;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (2.0 * rng.next_double() - 1.0) * scale;
    return t;
}

}  // namespace

TEST_CASE("forward ops: stated values") {
    Tape t;
    SUBCASE("bilinear with identity slices and basis vectors") {
        const std::size_t D = 4, F = 3;
        Tensor W({F, D, D});
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t i = 0; i < D; ++i) W.at(f, i, i) = 1.0;
        Tensor e1({1, D});
        e1.at(0, 0) = 1.0;
        ValueId out = t.bilinear(t.constant(e1), t.constant(W), t.constant(e1));
        for (std::size_t f = 0; f < F; ++f) CHECK(t.value(out).at(0, f) == 1.0);
    }
    SUBCASE("softmax over equal logits") {
        ValueId x = t.constant(Tensor({5, 1}, std::vector<double>(5, 1.7)));
        ValueId y = t.segment_softmax(x, std::vector<std::uint32_t>(5, 0));
        for (std::size_t i = 0; i < 5; ++i) CHECK(t.value(y).at(i, 0) == doctest::Approx(0.2));
    }
    SUBCASE("layer norm of a constant row hits the epsilon guard") {
        ValueId x = t.constant(Tensor({1, 4}, std::vector<double>(4, 3.0)));
        ValueId gamma = t.constant(Tensor({1, 4}, std::vector<double>(4, 2.0)));
        ValueId beta = t.constant(Tensor({1, 4}, std::vector<double>(4, 0.25)));
        ValueId y = t.layer_norm(x, gamma, beta);
        for (std::size_t j = 0; j < 4; ++j) CHECK(t.value(y).at(0, j) == doctest::Approx(0.25));
    }
    SUBCASE("elu and leaky relu") {
        ValueId x = t.constant(Tensor({1, 2}, {1.5, -2.0}));
        CHECK(t.value(t.elu(x)).at(0, 1) == doctest::Approx(std::expm1(-2.0)));
        CHECK(t.value(t.leaky_relu(x)).at(0, 1) == doctest::Approx(-0.02));
        CHECK(t.value(t.elu(x)).at(0, 0) == 1.5);
    }
    SUBCASE("shape mismatches are rejected") {
        ValueId a = t.constant(Tensor({2, 3}));
        ValueId b = t.constant(Tensor({3, 2}));
        CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
        CHECK_THROWS_AS(t.mul(a, b), std::invalid_argument);
        CHECK_THROWS_AS(t.matmul(a, a), std::invalid_argument);
    }
    SUBCASE("non-finite results are trapped") {
        ValueId z = t.constant(Tensor({1, 1}, {0.0}));
        CHECK_THROWS_AS(t.log(z), std::runtime_error);
    }
}

TEST_CASE("softmax properties") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 2 + rng.below(8);
        Tensor x({n, 1});
        for (std::size_t i = 0; i < n; ++i) x.at(i, 0) = rng.next_double() * 10 - 5;
        Tape t;
        ValueId y = t.segment_softmax(t.constant(x), std::vector<std::uint32_t>(n, 0));
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += t.value(y).at(i, 0);
        CHECK(std::abs(sum - 1.0) < 1e-12);

        Tensor shifted = x;
        for (std::size_t i = 0; i < n; ++i) shifted.at(i, 0) += 13.25;
        ValueId y2 = t.segment_softmax(t.constant(shifted), std::vector<std::uint32_t>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(t.value(y).at(i, 0) - t.value(y2).at(i, 0)) < 1e-12);
    }
}

TEST_CASE("segment softmax normalizes each segment independently") {
    Tape t;
    ValueId x = t.constant(Tensor({5, 1}, {1.0, 2.0, 3.0, -1.0, 0.5}));
    ValueId y = t.segment_softmax(x, {0, 0, 1, 1, 1});
    double s0 = t.value(y).at(0, 0) + t.value(y).at(1, 0);
    double s1 = t.value(y).at(2, 0) + t.value(y).at(3, 0) + t.value(y).at(4, 0);
    CHECK(std::abs(s0 - 1.0) < 1e-12);
    CHECK(std::abs(s1 - 1.0) < 1e-12);
}

TEST_CASE("layer norm rows have zero mean and unit variance pre scale/shift") {
    Rng rng(77);
    Tensor x({6, 16});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.next_double() * 4 - 2;
    Tape t;
    ValueId y = t.layer_norm(t.constant(x),
                             t.constant(Tensor({1, 16}, std::vector<double>(16, 1.0))),
                             t.constant(Tensor({1, 16})), 1e-9);
    for (std::size_t i = 0; i < 6; ++i) {
        double mean = 0, var = 0;
        for (std::size_t j = 0; j < 16; ++j) mean += t.value(y).at(i, j);
        mean /= 16;
        for (std::size_t j = 0; j < 16; ++j) {
            double c = t.value(y).at(i, j) - mean;
            var += c * c;
        }
        var /= 16;
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("backward: simple exact gradients") {
    SUBCASE("L = sum(W x): dL/dW is the outer structure") {
        ParamStore store;
        store.create("W", {3, 2}, Init::xavier, 1);
        Tensor x({2, 1}, {2.0, -1.5});
        Tape t;
        ValueId loss = t.sum_all(t.matmul(t.param(store, "W"), t.constant(x)));
        store.zero_grads();
        t.backward(loss);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(store.at("W").grad.at(i, 0) == doctest::Approx(2.0));
            CHECK(store.at("W").grad.at(i, 1) == doctest::Approx(-1.5));
        }
    }
    SUBCASE("unused parameter keeps a zero gradient") {
        ParamStore store;
        store.create("used", {2, 2}, Init::xavier, 1);
        store.create("unused", {2, 2}, Init::xavier, 2);
        Tape t;
        ValueId loss = t.sum_all(t.param(store, "used"));
        store.zero_grads();
        t.backward(loss);
        for (std::size_t i = 0; i < 4; ++i) CHECK(store.at("unused").grad[i] == 0.0);
    }
    SUBCASE("backward is linear in the upstream gradient") {
        ParamStore s1, s2;
        s1.create("W", {4, 4}, Init::xavier, 3);
        s2.create("W", {4, 4}, Init::xavier, 3);
        Tensor x = random_tensor({4, 4}, 9);
        auto run = [&](ParamStore& s, double factor) {
            Tape t;
            ValueId v = t.mul(t.param(s, "W"), t.constant(x));
            ValueId loss = t.scale(t.sum_all(t.elu(v)), factor);
            s.zero_grads();
            t.backward(loss);
        };
        run(s1, 1.0);
        run(s2, 2.0);
        for (std::size_t i = 0; i < 16; ++i)
            CHECK(s2.at("W").grad[i] == doctest::Approx(2.0 * s1.at("W").grad[i]).epsilon(1e-15));
    }
    SUBCASE("loss must be scalar; tape single-use") {
        ParamStore store;
        store.create("W", {2, 2}, Init::xavier, 1);
        Tape t;
        ValueId w = t.param(store, "W");
        CHECK_THROWS_AS(t.backward(w), std::invalid_argument);
        ValueId loss = t.sum_all(w);
        t.backward(loss);
        CHECK_THROWS_AS(t.backward(loss), std::runtime_error);
        t.reset();
        CHECK(t.size() == 0);
    }
}

TEST_CASE("finite differences validate every op family") {
    // One composite touching matmul, add_rowvec, concat, gather, scatter,
    // segment softmax, layer norm, bilinear, reductions and the activations.
    ParamStore store;
    store.create("W1", {6, 5}, Init::xavier, 11);
    store.create("b1", {1, 5}, Init::zeros, 11);
    store.create("W3", {3, 5, 5}, Init::xavier, 12);
    store.create("gamma", {1, 5}, Init::ones, 13);
    store.create("beta", {1, 5}, Init::zeros, 13);
    Tensor x = random_tensor({4, 6}, 21);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += x[i] > 0 ? 0.05 : -0.05;

    auto build = [&](Tape& t) {
        ValueId h = t.add_rowvec(t.matmul(t.constant(x), t.param(store, "W1")),
                                 t.param(store, "b1"));  // [4,5]
        ValueId a = t.elu(h);
        ValueId b = t.leaky_relu(t.scale(h, 0.7));
        ValueId c = t.emax(a, b);
        ValueId gathered = t.gather_rows(c, {0, 2, 3, 1, 2});  // [5,5]
        ValueId scattered = t.scatter_add_rows(gathered, {0, 1, 1, 2, 0}, 3);
        ValueId ln = t.layer_norm(scattered, t.param(store, "gamma"), t.param(store, "beta"));
        ValueId att = t.segment_softmax(t.row_sums(ln), {0, 0, 1});
        ValueId weighted = t.mul_colvec(ln, att);
        ValueId pooled = t.reduce_rows(weighted, Reduce::mean);  // [1,5]
        ValueId bil = t.bilinear(pooled, t.param(store, "W3"), ln);  // [3,3]
        ValueId probs = t.clamp(t.sigmoid(bil), 1e-7, 1.0 - 1e-7);
        ValueId nll = t.scale(t.sum_all(t.log(probs)), -1.0);
        ValueId mx = t.reduce_rows(t.relu(ln), Reduce::max);
        ValueId paired = t.concat_cols(t.repeat_row(mx, 2), t.sigmoid(t.gather_rows(c, {1, 3})));
        return t.add(nll, t.sum_all(paired));
    };
    auto report = finite_difference_check(store, build, 1e-5, 500, 99);
    CHECK(report.coords_checked >= 78);  // small store: every coordinate
    CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("finite difference harness sanity") {
    ParamStore store;
    store.create("p", {1, 8}, Init::xavier, 5);
    SUBCASE("quadratic is exact to roundoff") {
        auto build = [&](Tape& t) {
            ValueId p = t.param(store, "p");
            return t.sum_all(t.mul(p, p));
        };
        auto report = finite_difference_check(store, build, 1e-5, 200, 1);
        CHECK(report.max_rel_error < 1e-9);
    }
    SUBCASE("a corrupted gradient is flagged (negative control)") {
        Tape t0;
        ValueId loss0 = t0.sum_all(t0.param(store, "p"));
        store.zero_grads();
        t0.backward(loss0);
        // true derivative of sum(p) is 1 everywhere; pit it against a fake 2
        double num = 2.0, ana = store.at("p").grad[0];
        double rel = std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-8});
        CHECK(rel > 1e-2);
    }
}

TEST_CASE("param store init and determinism") {
    ParamStore a, b;
    a.create("layer.W", {128, 128}, Init::xavier, 42);
    b.create("layer.W", {128, 128}, Init::xavier, 42);
    CHECK(a.at("layer.W").value.bitwise_equal(b.at("layer.W").value));

    a.create("layer.b", {1, 128}, Init::zeros, 42);
    for (std::size_t i = 0; i < 128; ++i) CHECK(a.at("layer.b").value[i] == 0.0);

    CHECK_THROWS_AS(a.create("layer.W", {2, 2}, Init::zeros, 1), std::invalid_argument);

    SUBCASE("empirical stddev of the uniform init") {
        double bound = std::sqrt(6.0 / 256.0);
        double expected_sd = bound / std::sqrt(3.0);
        double sq = 0;
        const auto& t = a.at("layer.W").value;
        for (std::size_t i = 0; i < t.size(); ++i) sq += t[i] * t[i];
        double sd = std::sqrt(sq / static_cast<double>(t.size()));
        CHECK(sd > expected_sd * 0.8);
        CHECK(sd < expected_sd * 1.2);
    }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    ParamStore store;
    store.create("enc.W", {7, 3}, Init::xavier, 123);
    store.create("enc.b", {1, 3}, Init::zeros, 123);
    store.create("cube", {2, 3, 3}, Init::xavier, 7);
    // awkward values: a denormal, a negative, a repeating fraction
    store.at("enc.b").value[0] = 0x1p-1040;
    store.at("enc.b").value[1] = -3.5;
    store.at("enc.b").value[2] = 1.0 / 3.0;

    std::ostringstream out;
    store.save(out);
    std::istringstream in(out.str());
    ParamStore loaded;
    loaded.load(in);
    REQUIRE(loaded.size() == store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        CHECK(loaded.entry(i).name == store.entry(i).name);
        CHECK(loaded.entry(i).value.bitwise_equal(store.entry(i).value));
    }
}

TEST_CASE("snapshot/restore is bit-exact") {
    ParamStore store;
    store.create("w", {4, 4}, Init::xavier, 9);
    auto snap = store.snapshot_values();
    for (std::size_t i = 0; i < 16; ++i) store.at("w").value[i] += 0.25;
    store.restore_values(snap);
    CHECK(store.at("w").value.bitwise_equal(snap[0]));
}
