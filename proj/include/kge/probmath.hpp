#pragma once

// Kernels for categorical/Dirichlet probability: entropy, KL divergence,
// mutual information, softmax, column normalization, seeded sampling.
// All information quantities are in nats; 0*ln(0) := 0 throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kge/matrix.hpp"

namespace kge {

inline constexpr double kProbTolerance = 1e-10;

using Rng = std::mt19937_64;

namespace detail {
inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }
} // namespace detail

// A categorical distribution. Construction validates: entries >= 0 and the
// sum within 1e-10 of 1. Out-of-tolerance inputs are rejected, not
// renormalized.
class Categorical {
public:
    explicit Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty())
            throw std::invalid_argument("Categorical: empty probability vector");
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0))
                throw std::invalid_argument("Categorical: negative or NaN entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            throw std::invalid_argument("Categorical: probabilities sum to " +
                                        std::to_string(sum) + ", not 1");
    }

    static Categorical uniform(std::size_t n) {
        return Categorical(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static Categorical delta(std::size_t n, std::size_t index) {
        std::vector<double> p(n, 0.0);
        p.at(index) = 1.0;
        return Categorical(std::move(p));
    }

    // Normalizes an arbitrary non-negative weight vector.
    static Categorical from_weights(const std::vector<double>& w) {
        double sum = 0.0;
        for (double x : w) {
            if (!(x >= 0.0))
                throw std::invalid_argument("Categorical: negative weight");
            sum += x;
        }
        if (sum <= 0.0)
            throw std::domain_error("Categorical: all weights zero");
        std::vector<double> p(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] / sum;
        return Categorical(std::move(p));
    }

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const Categorical& other) const = default;

private:
    std::vector<double> probs_;
};

// A joint distribution over a (row symbol, column symbol) pair.
class JointDistribution {
public:
    JointDistribution(Matrix probs, std::vector<std::string> row_labels = {},
                      std::vector<std::string> col_labels = {})
        : probs_(std::move(probs)),
          row_labels_(std::move(row_labels)),
          col_labels_(std::move(col_labels)) {
        double sum = 0.0;
        for (double p : probs_.data()) {
            if (!(p >= 0.0))
                throw std::invalid_argument("JointDistribution: negative or NaN entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            throw std::invalid_argument("JointDistribution: mass sums to " +
                                        std::to_string(sum) + ", not 1");
        if (!row_labels_.empty() && row_labels_.size() != probs_.rows())
            throw std::invalid_argument("JointDistribution: row label count mismatch");
        if (!col_labels_.empty() && col_labels_.size() != probs_.cols())
            throw std::invalid_argument("JointDistribution: col label count mismatch");
    }

    const Matrix& probs() const { return probs_; }
    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }

    std::vector<double> row_marginal() const {
        std::vector<double> m(probs_.rows(), 0.0);
        for (std::size_t i = 0; i < probs_.rows(); ++i)
            for (std::size_t j = 0; j < probs_.cols(); ++j)
                m[i] += probs_(i, j);
        return m;
    }

    std::vector<double> col_marginal() const {
        std::vector<double> m(probs_.cols(), 0.0);
        for (std::size_t i = 0; i < probs_.rows(); ++i)
            for (std::size_t j = 0; j < probs_.cols(); ++j)
                m[j] += probs_(i, j);
        return m;
    }

private:
    Matrix probs_;
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
};

// H(p) = -sum p ln p, in nats.
inline double entropy(const Categorical& d) {
    double h = 0.0;
    for (double p : d.probs()) h -= detail::xlogx(p);
    return std::max(h, 0.0);
}

// Entropy of a raw probability vector (assumed non-negative, need not be
// validated as a Categorical; used for likelihood columns).
inline double entropy_raw(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p) h -= detail::xlogx(x);
    return std::max(h, 0.0);
}

// KL(p || q) = sum p ln(p/q). Requires absolute continuity: p_i > 0 implies
// q_i > 0.
inline double kl_divergence(const Categorical& p, const Categorical& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            if (q[i] <= 0.0)
                throw std::domain_error(
                    "kl_divergence: absolute continuity violated at index " +
                    std::to_string(i));
            d += p[i] * std::log(p[i] / q[i]);
        }
    }
    return std::max(d, 0.0);
}

// I(S,R) = sum_ij p(i,j) ln[p(i,j) / (p(i) p(j))].
inline double mutual_information(const JointDistribution& j) {
    const auto pr = j.row_marginal();
    const auto pc = j.col_marginal();
    double info = 0.0;
    for (std::size_t r = 0; r < j.probs().rows(); ++r)
        for (std::size_t c = 0; c < j.probs().cols(); ++c) {
            const double p = j.probs()(r, c);
            if (p > 0.0) info += p * std::log(p / (pr[r] * pc[c]));
        }
    return std::max(info, 0.0);
}

// softmax(v; gamma)_i = exp(gamma v_i) / sum_k exp(gamma v_k), stabilized by
// max subtraction. Callers pass negated energies, so larger input means
// larger probability.
inline Categorical softmax(const std::vector<double>& values, double gamma) {
    if (values.empty())
        throw std::invalid_argument("softmax: empty input");
    if (!(gamma >= 0.0))
        throw std::invalid_argument("softmax: gamma must be >= 0");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("softmax: non-finite value");
    const double vmax = *std::max_element(values.begin(), values.end());
    std::vector<double> e(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        e[i] = std::exp(gamma * (values[i] - vmax));
        sum += e[i];
    }
    for (double& x : e) x /= sum;
    return Categorical(std::move(e));
}

// Draws an index with probability probs[i]. Deterministic given the seed and
// call sequence; generators are caller-owned.
inline std::size_t sample_categorical(const Categorical& d, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cum += d[i];
        if (u < cum) return i;
    }
    return d.size() - 1; // guard against rounding at u ~ 1
}

// Rescales every column of a non-negative matrix to sum to 1.
inline Matrix normalize_columns(const Matrix& m) {
    Matrix out = m;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (!(m(i, j) >= 0.0))
                throw std::invalid_argument("normalize_columns: negative entry");
            sum += m(i, j);
        }
        if (sum <= 0.0)
            throw std::domain_error("normalize_columns: column " + std::to_string(j) +
                                    " sums to zero");
        for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, j) / sum;
    }
    return out;
}

} // namespace kge
