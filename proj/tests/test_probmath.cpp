#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kge/probmath.hpp"
#include "oracles.hpp"

using namespace kge;
using Catch::Approx;

TEST_CASE("entropy of analytic cases") {
    CHECK(entropy(Categorical({0.25, 0.25, 0.25, 0.25})) ==
          Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(entropy(Categorical({1.0, 0.0, 0.0})) == 0.0);
    CHECK(entropy(Categorical({0.5, 0.25, 0.25})) ==
          Approx(1.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy bounded by ln(dim), equality iff uniform") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = oracle::random_distribution(4, rng);
        CHECK(entropy(Categorical(p)) <= std::log(4.0) + 1e-10);
    }
    CHECK(entropy(Categorical::uniform(7)) == Approx(std::log(7.0)).margin(1e-10));
}

TEST_CASE("categorical construction rejects bad input") {
    CHECK_THROWS_AS(Categorical({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(Categorical({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(Categorical(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("kl divergence analytic and oracle values") {
    const Categorical p({0.3, 0.7});
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(Categorical({1.0, 0.0}), Categorical({0.5, 0.5})) ==
          Approx(std::log(2.0)).epsilon(1e-12));
    // frozen from the direct-summation oracle
    const double expected = oracle::kl({0.75, 0.25}, {0.5, 0.5});
    CHECK(expected == Approx(0.130812).margin(1e-6));
    CHECK(kl_divergence(Categorical({0.75, 0.25}), Categorical({0.5, 0.5})) ==
          Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl divergence nonnegative, absolute continuity enforced") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Categorical p(oracle::random_distribution(5, rng));
        const Categorical q(oracle::random_distribution(5, rng));
        CHECK(kl_divergence(p, q) >= 0.0);
    }
    CHECK_THROWS_AS(
        kl_divergence(Categorical({0.5, 0.5}), Categorical({1.0, 0.0})),
        std::domain_error);
}

TEST_CASE("mutual information analytic and oracle values") {
    CHECK(mutual_information(JointDistribution(
              Matrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}))) ==
          Approx(std::log(2.0)).epsilon(1e-12));

    const double expected = oracle::mutual_information({{0.4, 0.1}, {0.1, 0.4}});
    CHECK(expected == Approx(0.192745).margin(1e-6));
    CHECK(mutual_information(JointDistribution(
              Matrix::from_rows({{0.4, 0.1}, {0.1, 0.4}}))) ==
          Approx(expected).epsilon(1e-12));
}

TEST_CASE("mutual information vanishes for independent joints") {
    Rng rng(11);
    const auto pr = oracle::random_distribution(3, rng);
    const auto pc = oracle::random_distribution(4, rng);
    Matrix j(3, 4);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) j(r, c) = pr[r] * pc[c];
    CHECK(mutual_information(JointDistribution(j)) == Approx(0.0).margin(1e-12));
}

TEST_CASE("mutual information equals KL to the product of marginals") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = oracle::random_distribution(12, rng);
        Matrix j(3, 4, std::vector<double>(w));
        const JointDistribution joint(j);
        const auto pr = joint.row_marginal();
        const auto pc = joint.col_marginal();
        std::vector<double> outer(12);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 4; ++c) outer[r * 4 + c] = pr[r] * pc[c];
        const double mi = mutual_information(joint);
        const double kl = kl_divergence(Categorical(w), Categorical(outer));
        CHECK(mi == Approx(kl).margin(1e-10));
    }
}

TEST_CASE("mutual information symmetric under transpose") {
    Rng rng(17);
    const auto w = oracle::random_distribution(6, rng);
    const Matrix j(2, 3, std::vector<double>(w));
    CHECK(mutual_information(JointDistribution(j)) ==
          Approx(mutual_information(JointDistribution(j.transposed())))
              .margin(1e-12));
}

TEST_CASE("softmax analytic cases") {
    const Categorical u = softmax({1.7, 1.7, 1.7}, 3.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(u[i] == Approx(1.0 / 3).margin(1e-12));

    const Categorical g0 = softmax({5.0, -3.0, 0.2}, 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(g0[i] == Approx(1.0 / 3).margin(1e-12));

    const Categorical r = softmax({0.0, -std::log(2.0)}, 1.0);
    CHECK(r[0] == Approx(2.0 / 3).epsilon(1e-12));
    CHECK(r[1] == Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("softmax shift invariance and large-gamma concentration") {
    Rng rng(23);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(4), shifted(4);
        for (std::size_t i = 0; i < 4; ++i) {
            v[i] = unif(rng);
            shifted[i] = v[i] + 3.21;
        }
        const Categorical a = softmax(v, 1.7);
        const Categorical b = softmax(shifted, 1.7);
        double sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(a[i] == Approx(b[i]).margin(1e-12));
            sum += a[i];
        }
        CHECK(sum == Approx(1.0).margin(1e-12));
    }
    const Categorical hard = softmax({0.0, 0.1, -0.4}, 1e3);
    CHECK(hard[1] >= 1.0 - 1e-6);
}

TEST_CASE("sample_categorical determinism and delta") {
    Rng rng(99);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_categorical(Categorical({0.0, 1.0, 0.0}), rng) == 1);

    Rng a(1234), b(1234);
    const Categorical d({0.5, 0.5});
    for (int i = 0; i < 100; ++i)
        CHECK(sample_categorical(d, a) == sample_categorical(d, b));
}

TEST_CASE("sample_categorical empirical frequencies") {
    Rng rng(2024);
    const Categorical d({0.3, 0.7});
    std::size_t counts[2] = {0, 0};
    const int N = 100000;
    for (int i = 0; i < N; ++i) ++counts[sample_categorical(d, rng)];
    CHECK(std::abs(double(counts[0]) / N - 0.3) < 0.01);
    CHECK(std::abs(double(counts[1]) / N - 0.7) < 0.01);
}

TEST_CASE("normalize_columns") {
    CHECK(normalize_columns(Matrix::identity(3)) == Matrix::identity(3));
    const Matrix m = normalize_columns(Matrix(2, 1, std::vector<double>{2.0, 2.0}));
    CHECK(m(0, 0) == 0.5);
    CHECK(m(1, 0) == 0.5);
    const Matrix dir = normalize_columns(Matrix(2, 1, std::vector<double>{1.0, 3.0}));
    CHECK(dir(0, 0) == 0.25);
    CHECK(dir(1, 0) == 0.75);
    CHECK_THROWS_AS(normalize_columns(Matrix(2, 2, 0.0)), std::domain_error);
}
