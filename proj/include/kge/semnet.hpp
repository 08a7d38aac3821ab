#pragma once

// Semantic-network layer: concept-stimulus matrices, the information
// transfer energy Omega(lambda) = -lambda*I(S,R) + (1-lambda)*H(S),
// concept similarity, synsets, and least-effort optimization of the
// matrix at fixed lambda.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kge/matrix.hpp"
#include "kge/probmath.hpp"

namespace kge {

// Balance between information-transfer maximization and concept-entropy
// cost; the cited least-effort optimum.
inline constexpr double kDefaultLambda = 0.41;

enum class MatrixMode { Binary, Weighted };

// m x n link matrix: rows are stimuli, columns are concepts. In binary mode
// entry (j, i) is 1 iff stimulus j belongs to concept i.
class ConceptStimulusMatrix {
public:
    ConceptStimulusMatrix(Matrix entries, MatrixMode mode,
                          std::vector<std::string> stimulus_labels = {},
                          std::vector<std::string> concept_labels = {})
        : entries_(std::move(entries)),
          mode_(mode),
          stimulus_labels_(std::move(stimulus_labels)),
          concept_labels_(std::move(concept_labels)) {
        if (entries_.rows() == 0 || entries_.cols() == 0)
            throw std::invalid_argument("ConceptStimulusMatrix: empty matrix");
        double total = 0.0;
        for (double v : entries_.data()) {
            if (!(v >= 0.0))
                throw std::invalid_argument("ConceptStimulusMatrix: negative entry");
            if (mode_ == MatrixMode::Binary && v != 0.0 && v != 1.0)
                throw std::invalid_argument(
                    "ConceptStimulusMatrix: non-binary entry in binary mode");
            total += v;
        }
        if (total <= 0.0)
            throw std::invalid_argument("ConceptStimulusMatrix: all entries zero");
        if (!stimulus_labels_.empty() && stimulus_labels_.size() != entries_.rows())
            throw std::invalid_argument("ConceptStimulusMatrix: stimulus label count");
        if (!concept_labels_.empty() && concept_labels_.size() != entries_.cols())
            throw std::invalid_argument("ConceptStimulusMatrix: concept label count");
    }

    const Matrix& entries() const { return entries_; }
    MatrixMode mode() const { return mode_; }
    std::size_t n_stimuli() const { return entries_.rows(); }
    std::size_t n_concepts() const { return entries_.cols(); }
    const std::vector<std::string>& stimulus_labels() const { return stimulus_labels_; }
    const std::vector<std::string>& concept_labels() const { return concept_labels_; }

private:
    Matrix entries_;
    MatrixMode mode_;
    std::vector<std::string> stimulus_labels_;
    std::vector<std::string> concept_labels_;
};

struct TransferEnergyReport {
    double lambda = 0.0;
    double information = 0.0;     // I(S,R), nats
    double concept_entropy = 0.0; // H(S), nats
    double omega = 0.0;           // -lambda*I + (1-lambda)*H(S)
    std::optional<double> a_omega;      // 1/lambda - 1, absent at lambda = 0
    std::optional<double> scaled_omega; // omega/lambda, absent at lambda = 0
};

// Joint p(s_i, r_j) proportional to the link weights: uniform mass over
// links in binary mode, count-proportional in weighted mode. Rows of the
// result are concepts, columns are stimuli.
inline JointDistribution induced_joint(const ConceptStimulusMatrix& csm) {
    const Matrix& a = csm.entries();
    double total = 0.0;
    for (double v : a.data()) total += v;
    Matrix joint(csm.n_concepts(), csm.n_stimuli());
    for (std::size_t j = 0; j < a.rows(); ++j)
        for (std::size_t i = 0; i < a.cols(); ++i)
            joint(i, j) = a(j, i) / total;
    return JointDistribution(std::move(joint), csm.concept_labels(),
                             csm.stimulus_labels());
}

inline TransferEnergyReport transfer_energy(const ConceptStimulusMatrix& csm,
                                            double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::domain_error("transfer_energy: lambda must lie in [0, 1]");
    const JointDistribution joint = induced_joint(csm);
    TransferEnergyReport rep;
    rep.lambda = lambda;
    rep.information = mutual_information(joint);
    rep.concept_entropy = entropy_raw(joint.row_marginal());
    rep.omega = -lambda * rep.information + (1.0 - lambda) * rep.concept_entropy;
    if (lambda > 0.0) {
        rep.a_omega = 1.0 / lambda - 1.0;
        rep.scaled_omega = rep.omega / lambda;
    }
    return rep;
}

// Zero-entropy transmitter case: Omega_o = I(S,R).
inline double machine_transfer_energy(const ConceptStimulusMatrix& csm) {
    return mutual_information(induced_joint(csm));
}

// Pairwise cosine similarity of concept stimulus-vectors (columns). A
// zero-stimulus concept has similarity 0 against everything, including
// itself, so disconnected concepts are visible on the diagonal.
inline Matrix similarity_matrix(const ConceptStimulusMatrix& csm) {
    const std::size_t n = csm.n_concepts();
    const Matrix& a = csm.entries();
    std::vector<double> norms(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double ss = 0.0;
        for (std::size_t k = 0; k < a.rows(); ++k) ss += a(k, i) * a(k, i);
        norms[i] = std::sqrt(ss);
    }
    Matrix sim(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) dot += a(k, i) * a(k, j);
            const double denom = norms[i] * norms[j];
            const double c = denom > 0.0 ? dot / denom : 0.0;
            sim(i, j) = c;
            sim(j, i) = c;
        }
    return sim;
}

// Groups concepts whose stimulus link sets are identical. Binary mode only.
inline std::vector<std::vector<std::size_t>> synsets(const ConceptStimulusMatrix& csm) {
    if (csm.mode() != MatrixMode::Binary)
        throw std::domain_error("synsets: defined on binary link sets only");
    const std::size_t n = csm.n_concepts();
    std::vector<std::vector<std::size_t>> groups;
    std::vector<bool> assigned(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (assigned[i]) continue;
        std::vector<std::size_t> group{i};
        assigned[i] = true;
        const auto ci = csm.entries().col(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!assigned[j] && csm.entries().col(j) == ci) {
                group.push_back(j);
                assigned[j] = true;
            }
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

namespace detail {

inline double omega_of_binary(const Matrix& entries, double lambda) {
    return transfer_energy(
               ConceptStimulusMatrix(entries, MatrixMode::Binary), lambda)
        .omega;
}

} // namespace detail

// Greedy steepest single-bit-flip descent on Omega(lambda) over binary
// matrices, from random nonzero starts, keeping the best across restarts.
// The all-zero matrix is excluded (it induces no joint).
inline std::pair<ConceptStimulusMatrix, TransferEnergyReport>
optimize_matrix(std::size_t n_concepts, std::size_t n_stimuli, double lambda,
                Rng& rng, int restarts) {
    if (n_concepts < 1 || n_stimuli < 1)
        throw std::invalid_argument("optimize_matrix: dimensions must be >= 1");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::domain_error("optimize_matrix: lambda must lie in [0, 1]");
    if (restarts < 1)
        throw std::invalid_argument("optimize_matrix: restarts must be >= 1");

    std::uniform_int_distribution<int> bit(0, 1);
    std::optional<Matrix> best;
    double best_omega = 0.0;

    for (int r = 0; r < restarts; ++r) {
        Matrix m(n_stimuli, n_concepts);
        double ones = 0.0;
        do {
            ones = 0.0;
            for (double& v : m.data()) {
                v = static_cast<double>(bit(rng));
                ones += v;
            }
        } while (ones == 0.0);

        double omega = detail::omega_of_binary(m, lambda);
        for (;;) {
            double best_flip_omega = omega;
            std::size_t best_flip = m.size();
            for (std::size_t k = 0; k < m.size(); ++k) {
                double& v = m.data()[k];
                const double old = v;
                v = 1.0 - v;
                bool nonzero = false;
                for (double x : m.data())
                    if (x != 0.0) { nonzero = true; break; }
                if (nonzero) {
                    const double cand = detail::omega_of_binary(m, lambda);
                    if (cand < best_flip_omega - 1e-12) {
                        best_flip_omega = cand;
                        best_flip = k;
                    }
                }
                v = old;
            }
            if (best_flip == m.size()) break;
            m.data()[best_flip] = 1.0 - m.data()[best_flip];
            omega = best_flip_omega;
        }

        if (!best || omega < best_omega) {
            best = m;
            best_omega = omega;
        }
    }

    ConceptStimulusMatrix csm(*best, MatrixMode::Binary);
    return {csm, transfer_energy(csm, lambda)};
}

} // namespace kge
