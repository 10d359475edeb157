#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "idapbc/dictionary.hpp"
#include "idapbc/rng.hpp"
#include "test_util.hpp"

using namespace idapbc;
using testutil::close;

namespace {

double binomial(int n, int k) {
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

SparseLinearModel random_model(std::mt19937& rng, int n_vars, int degree) {
    SparseLinearModel model(PolynomialLibrary::make(n_vars, degree));
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> gate(-3.0, 3.0);
    for (std::size_t j = 0; j < model.library.size(); ++j) {
        model.xi[j] = coeff(rng);
        model.log_alpha[j] = gate(rng);
    }
    return model;
}

Vec random_point(std::mt19937& rng, int n, double span = 1.5) {
    std::uniform_real_distribution<double> dist(-span, span);
    Vec x(n);
    for (auto& v : x) v = dist(rng);
    return x;
}

}  // namespace

TEST_CASE("library sizes follow the binomial count") {
    for (int n = 1; n <= 4; ++n) {
        for (int d = 1; d <= 5; ++d) {
            const auto lib = PolynomialLibrary::make(n, d);
            CHECK(static_cast<double>(lib.size()) == binomial(n + d, d));
            REQUIRE(!lib.terms.empty());
            for (int e : lib.terms.front()) CHECK(e == 0);  // constant first
        }
    }
    CHECK(PolynomialLibrary::make(3, 4).size() == 35);
    CHECK_THROWS_AS(PolynomialLibrary::make(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(PolynomialLibrary::make(3, 0), std::invalid_argument);
}

TEST_CASE("graded-lex ordering for three variables, degree two") {
    const auto lib = PolynomialLibrary::make(3, 2);
    const std::vector<std::vector<int>> expected = {
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
        {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
    };
    REQUIRE(lib.terms.size() == expected.size());
    for (std::size_t j = 0; j < expected.size(); ++j) CHECK(lib.terms[j] == expected[j]);
}

TEST_CASE("features at simple points") {
    const auto lib = PolynomialLibrary::make(3, 2);
    const Vec ones = features(lib, Vec{1.0, 1.0, 1.0});
    REQUIRE(ones.size() == 10);
    for (double v : ones) CHECK(v == 1.0);

    const Vec along_q = features(lib, Vec{2.0, 0.0, 0.0});
    const Vec expected{1.0, 2.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    REQUIRE(along_q.size() == expected.size());
    for (std::size_t j = 0; j < expected.size(); ++j) CHECK(along_q[j] == expected[j]);

    CHECK_THROWS_AS(features(lib, Vec{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("features match an independent monomial evaluation") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 4;
        const int d = 1 + trial % 5;
        const auto lib = PolynomialLibrary::make(n, d);
        const Vec x = random_point(rng, n);
        const Vec th = features(lib, x);
        for (std::size_t j = 0; j < lib.size(); ++j) {
            double ref = 1.0;
            for (int v = 0; v < n; ++v) ref *= std::pow(x[v], lib.terms[j][v]);
            CHECK(close(th[j], ref, 1e-12, 1e-12));
        }
    }
}

TEST_CASE("feature Jacobian rows") {
    const auto lib = PolynomialLibrary::make(3, 2);
    const Mat jac = feature_jacobian(lib, Vec{3.0, -1.0, 2.0});
    REQUIRE(jac.rows() == 10);
    REQUIRE(jac.cols() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(jac(0, i) == 0.0);  // constant row
    // q^2 row: (2q, 0, 0) at q = 3.
    CHECK(jac(4, 0) == 6.0);
    CHECK(jac(4, 1) == 0.0);
    CHECK(jac(4, 2) == 0.0);
}

TEST_CASE("feature Jacobian agrees with finite differences") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 3;
        const auto lib = PolynomialLibrary::make(n, 4);
        const Vec x = random_point(rng, n);
        const Mat jac = feature_jacobian(lib, x);
        for (int i = 0; i < n; ++i) {
            Vec xp = x;
            Vec xm = x;
            const double h = 1e-6;
            xp[i] += h;
            xm[i] -= h;
            const Vec fp = features(lib, xp);
            const Vec fm = features(lib, xm);
            for (std::size_t j = 0; j < lib.size(); ++j) {
                const double fd = (fp[j] - fm[j]) / (2.0 * h);
                CHECK(close(jac(j, i), fd, 1e-6, 1e-6));
            }
        }
    }
}

TEST_CASE("deterministic gates saturate exactly and pass through the midpoint") {
    const HardConcreteConstants hc;
    CHECK(hard_concrete_deterministic(-1e6, hc) == 0.0);
    CHECK(hard_concrete_deterministic(1e6, hc) == 1.0);
    // sigmoid(0) (zeta - gamma) + gamma = 0.5 * 1.2 - 0.1 = 0.5.
    CHECK(close(hard_concrete_deterministic(0.0, hc), 0.5, 1e-15, 0.0));

    SparseLinearModel model(PolynomialLibrary::make(2, 1));
    model.log_alpha = {-1e6, 0.0, 1e6};
    const Vec gates = deterministic_gates(model);
    CHECK(gates[0] == 0.0);
    CHECK(close(gates[1], 0.5, 1e-15, 0.0));
    CHECK(gates[2] == 1.0);
    for (double g : gates) {
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
    }
}

TEST_CASE("sampled gates reduce to the tempered sigmoid at noise one half") {
    const HardConcreteConstants hc;
    const double log_alpha = 0.2;
    const double s = 1.0 / (1.0 + std::exp(-log_alpha / hc.beta));
    const double expected = std::min(1.0, std::max(0.0, s * (hc.zeta - hc.gamma) + hc.gamma));
    CHECK(close(hard_concrete_sample(log_alpha, 0.5, hc), expected, 1e-14, 0.0));

    CHECK(hard_concrete_sample(-1e6, 0.01, hc) == 0.0);
    CHECK(hard_concrete_sample(-1e6, 0.99, hc) == 0.0);
    CHECK_THROWS_AS(hard_concrete_sample(0.0, 0.0, hc), std::invalid_argument);
    CHECK_THROWS_AS(hard_concrete_sample(0.0, 1.0, hc), std::invalid_argument);
}

TEST_CASE("sampled gates are bit-identical under a fixed counter-based seed") {
    SparseLinearModel model(PolynomialLibrary::make(3, 3));
    std::mt19937 init(3);
    std::uniform_real_distribution<double> gate(-2.0, 2.0);
    for (auto& la : model.log_alpha) la = gate(init);

    const auto draw = [&](std::uint64_t seed) {
        CounterRng rng(seed);
        Vec noise(model.library.size());
        for (std::size_t j = 0; j < noise.size(); ++j)
            noise[j] = rng.uniform(4, static_cast<std::uint64_t>(j));
        return sample_gates(model, noise);
    };
    const Vec a = draw(123);
    const Vec b = draw(123);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);

    const Vec c = draw(124);
    bool any_different = false;
    for (std::size_t j = 0; j < a.size(); ++j) any_different = any_different || a[j] != c[j];
    CHECK(any_different);
}

TEST_CASE("expected-gate penalty endpoints and midpoint value") {
    SparseLinearModel model(PolynomialLibrary::make(3, 2));
    for (auto& la : model.log_alpha) la = -1e6;
    CHECK(l0_penalty(model) == 0.0);
    for (auto& la : model.log_alpha) la = 1e6;
    CHECK(close(l0_penalty(model), static_cast<double>(model.library.size()), 1e-12, 0.0));

    const HardConcreteConstants hc;
    // sigma((2/3) ln 11) computed independently.
    const double ref = 1.0 / (1.0 + std::exp(-(2.0 / 3.0) * std::log(11.0)));
    CHECK(close(l0_term(0.0, hc), ref, 1e-12, 0.0));
    CHECK(close(l0_term(0.0, hc), 0.8318222, 1e-6, 0.0));
}

TEST_CASE("expected-gate penalty is nondecreasing in each gate parameter") {
    const HardConcreteConstants hc;
    double prev = -1.0;
    for (double la = -6.0; la <= 6.0; la += 0.25) {
        const double now = l0_term(la, hc);
        CHECK(now >= prev);
        prev = now;
    }
}

TEST_CASE("evaluate matches the gated dot-product oracle and is linear in xi") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        SparseLinearModel model = random_model(rng, 3, 3);
        const Vec gates = deterministic_gates(model);
        const Vec x = random_point(rng, 3);

        const Vec th = features(model.library, x);
        double ref = 0.0;
        for (std::size_t j = 0; j < th.size(); ++j) ref += gates[j] * model.xi[j] * th[j];
        CHECK(close(evaluate(model, x, gates), ref, 1e-12, 1e-12));

        SparseLinearModel doubled = model;
        for (auto& c : doubled.xi) c *= 2.0;
        CHECK(close(evaluate(doubled, x, gates), 2.0 * evaluate(model, x, gates), 1e-12, 1e-12));
    }

    SparseLinearModel model(PolynomialLibrary::make(3, 2));
    const Vec x{0.3, -0.4, 0.9};
    const Vec zeros(model.library.size(), 0.0);
    model.xi[0] = 7.5;
    CHECK(evaluate(model, x, zeros) == 0.0);
    const Vec ones(model.library.size(), 1.0);
    CHECK(evaluate(model, x, ones) == 7.5);
    CHECK_THROWS_AS(evaluate(model, x, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("evaluate_gradient analytic forms and finite-difference agreement") {
    SparseLinearModel q_squared(PolynomialLibrary::make(3, 2));
    q_squared.xi[4] = 1.0;  // q^2 term in graded-lex order
    Vec open_gates(q_squared.library.size(), 1.0);
    const Vec g = evaluate_gradient(q_squared, Vec{1.7, 0.2, -0.3}, open_gates);
    CHECK(close(g[0], 3.4, 1e-14, 0.0));
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);

    const Vec closed(q_squared.library.size(), 0.0);
    const Vec zero = evaluate_gradient(q_squared, Vec{1.7, 0.2, -0.3}, closed);
    for (double v : zero) CHECK(v == 0.0);

    std::mt19937 rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        SparseLinearModel model = random_model(rng, 3, 4);
        const Vec gates = deterministic_gates(model);
        for (int pt = 0; pt < 100; ++pt) {
            const Vec x = random_point(rng, 3);
            const Vec grad = evaluate_gradient(model, x, gates);
            for (int i = 0; i < 3; ++i) {
                Vec xp = x;
                Vec xm = x;
                const double h = 1e-5;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (evaluate(model, xp, gates) - evaluate(model, xm, gates)) / (2.0 * h);
                CHECK(close(grad[i], fd, 1e-6, 1e-4));
            }
        }
    }
}

TEST_CASE("export produces readable gated polynomials") {
    const std::vector<std::string> names{"q", "p", "Q"};
    SparseLinearModel model(PolynomialLibrary::make(3, 2));
    for (auto& la : model.log_alpha) la = -10.0;
    CHECK(export_expression(model, names) == "0");
    CHECK(active_term_count(model) == 0);

    // Constant + q + Q^2 with the rest gated off.
    model.xi[0] = 2.0114;
    model.xi[1] = 2.2373;
    model.xi[9] = -1.7219;
    model.log_alpha[0] = 10.0;
    model.log_alpha[1] = 10.0;
    model.log_alpha[9] = 10.0;
    CHECK(export_expression(model, names) == "2.0114 + 2.2373*q - 1.7219*Q^2");
    CHECK(active_term_count(model) == 3);

    SparseLinearModel cross(PolynomialLibrary::make(3, 2));
    for (auto& la : cross.log_alpha) la = -10.0;
    cross.xi[8] = 1.7312;  // p*Q
    cross.log_alpha[8] = 10.0;
    CHECK(export_expression(cross, names) == "1.7312*p*Q");

    cross.xi[0] = 0.2217;
    cross.log_alpha[0] = 10.0;
    CHECK(export_expression(cross, names) == "0.2217 + 1.7312*p*Q");

    SparseLinearModel powers(PolynomialLibrary::make(1, 4));
    for (auto& la : powers.log_alpha) la = -10.0;
    powers.xi = {0.0, -1.0, 0.0, 0.0, 0.1458};
    powers.log_alpha[1] = 10.0;
    powers.log_alpha[4] = 10.0;
    CHECK(export_expression(powers, {"Q"}) == "-1.0000*Q + 0.1458*Q^4");
}

TEST_CASE("model validation catches mismatched parameter lengths") {
    SparseLinearModel model(PolynomialLibrary::make(3, 2));
    CHECK_NOTHROW(model.validate());
    model.xi.pop_back();
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);

    SparseLinearModel bad_constants(PolynomialLibrary::make(2, 2));
    bad_constants.constants.gamma = 0.1;
    CHECK_THROWS_AS(bad_constants.validate(), std::invalid_argument);
}
