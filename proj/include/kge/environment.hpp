#pragma once

// Simulated generative processes: the environment side holding the true
// states and emitting stimuli, plus the built-in fixture scenarios.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kge/genmodel.hpp"
#include "kge/matrix.hpp"
#include "kge/probmath.hpp"

namespace kge {

// How the environment moves when the agent takes no action.
enum class AutonomousDynamics { Identity, Action0 };

// The true process: hidden state, per-action transitions, emissions. The
// state is private by construction; the agent sees only emitted stimuli.
class GenerativeProcess {
public:
    GenerativeProcess(Matrix A_star, std::vector<Matrix> B_star,
                      Categorical initial,
                      AutonomousDynamics autonomous = AutonomousDynamics::Identity)
        : A_star_(std::move(A_star)),
          B_star_(std::move(B_star)),
          initial_(std::move(initial)),
          autonomous_(autonomous),
          state_(0) {
        const std::size_t n = A_star_.cols();
        check_stochastic(A_star_, "A_star");
        for (const Matrix& b : B_star_) {
            if (b.rows() != n || b.cols() != n)
                throw std::invalid_argument("GenerativeProcess: B_star dimension mismatch");
            check_stochastic(b, "B_star");
        }
        if (initial_.size() != n)
            throw std::invalid_argument("GenerativeProcess: initial distribution size");
    }

    std::size_t n_states() const { return A_star_.cols(); }
    std::size_t n_stimuli() const { return A_star_.rows(); }
    std::size_t n_actions() const { return B_star_.size(); }
    const Matrix& emission() const { return A_star_; }
    const std::vector<Matrix>& transitions() const { return B_star_; }
    const Categorical& initial() const { return initial_; }
    AutonomousDynamics autonomous() const { return autonomous_; }

    void reset(Rng& rng) { state_ = sample_categorical(initial_, rng); }

    // Transition by the action's matrix (autonomous dynamics when none),
    // then emit a stimulus from the new state's emission column.
    std::size_t step(std::optional<std::size_t> action, Rng& rng) {
        if (action) {
            if (*action >= B_star_.size())
                throw std::domain_error("GenerativeProcess: invalid action index");
            state_ = sample_categorical(
                Categorical::from_weights(B_star_[*action].col(state_)), rng);
        } else if (autonomous_ == AutonomousDynamics::Action0 && !B_star_.empty()) {
            state_ = sample_categorical(
                Categorical::from_weights(B_star_[0].col(state_)), rng);
        }
        return sample_categorical(Categorical::from_weights(A_star_.col(state_)), rng);
    }

private:
    static void check_stochastic(const Matrix& m, const char* name) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                if (!(m(i, j) >= 0.0))
                    throw std::invalid_argument(std::string("GenerativeProcess: negative entry in ") + name);
                sum += m(i, j);
            }
            if (std::abs(sum - 1.0) > kProbTolerance)
                throw std::invalid_argument(std::string("GenerativeProcess: column of ") +
                                            name + " does not sum to 1");
        }
    }

    Matrix A_star_;
    std::vector<Matrix> B_star_;
    Categorical initial_;
    AutonomousDynamics autonomous_;
    std::size_t state_; // hidden from the agent; no public accessor
};

// Which loops run in which phase.
struct RegimeConfig {
    bool loop_I_learning = true;    // perception + Dirichlet updating
    bool loop_II = false;           // planning + action
    bool loop_I_frozen_in_use = false;

    void validate() const {
        if (!loop_I_learning && !loop_II)
            throw std::invalid_argument("RegimeConfig: at least one loop must be active");
    }
};

struct ExpansionConfig {
    std::size_t window = 10;
    double threshold = 0.0; // <= 0 means "0.9 * ln(m)" resolved at run time
    double prior_concentration = 0.1;
};

// Everything needed to run a curriculum.
struct Scenario {
    GenerativeProcess environment;
    GenerativeModel agent;
    DirichletCounts counts;
    RegimeConfig regime;
    std::size_t episodes = 1;
    std::size_t use_episodes = 0;
    std::uint64_t seed = 0;
    double eta = 1.0; // Dirichlet learning rate
    std::optional<ExpansionConfig> expansion;
};

namespace detail {

inline DirichletCounts counts_like(const Matrix& A, const std::vector<Matrix>& B,
                                   const std::vector<double>& D, double strength) {
    DirichletCounts c;
    c.a = A;
    for (double& v : c.a.data()) v = v * strength + 0.05;
    for (const Matrix& b : B) {
        Matrix m = b;
        for (double& v : m.data()) v = v * strength + 0.05;
        c.b.push_back(std::move(m));
    }
    c.d = D;
    for (double& v : c.d) v = v * strength + 0.05;
    return c;
}

} // namespace detail

// Built-in fixtures: a two-concept discrimination task (declarative), a
// T-maze with one rewarded arm (procedural), and a cued task whose correct
// action depends on the initial stimulus (conditional).
inline Scenario fixture(const std::string& name) {
    if (name == "discrimination-2x2") {
        // Two static environment states, each with a distinct dominant
        // stimulus; no actions, loop I only.
        Matrix A_star = Matrix::from_rows({{0.95, 0.05}, {0.05, 0.95}});
        std::vector<Matrix> B_star{Matrix::identity(2)};
        GenerativeProcess env(A_star, B_star, Categorical::uniform(2));

        const std::size_t T = 4;
        // Mildly informative prior counts aligned with the labels so the
        // learned columns do not swap.
        DirichletCounts counts;
        counts.a = Matrix::from_rows({{1.0, 0.5}, {0.5, 1.0}});
        counts.b = {Matrix::from_rows({{1.0, 0.5}, {0.5, 1.0}})};
        counts.d = {1.0, 1.0};
        std::vector<Categorical> C(T, Categorical::uniform(2));
        std::vector<Policy> policies{Policy{std::vector<std::size_t>(T - 1, 0)}};
        GenerativeModel agent = expected_model(counts, 1.0, T, C, policies);

        RegimeConfig regime{.loop_I_learning = true, .loop_II = false,
                            .loop_I_frozen_in_use = false};
        return Scenario{std::move(env), std::move(agent), std::move(counts),
                        regime, 200, 0, 7};
    }

    if (name == "tmaze") {
        // States: 0 center, 1 left arm (empty), 2 right arm (food),
        // 3 aliased second start that behaves like the center. Stimuli:
        // 0 center cue, 1 food, 2 empty. The food sits on the action-1 arm
        // so reaching it requires learned transitions, not the tie-break
        // default.
        Matrix A_star = Matrix::from_rows({{1.0, 0.0, 0.0, 1.0},
                                           {0.0, 0.0, 1.0, 0.0},
                                           {0.0, 1.0, 0.0, 0.0}});
        Matrix go_left = Matrix::from_rows({{0.0, 0.0, 0.0, 0.0},
                                            {1.0, 1.0, 0.0, 1.0},
                                            {0.0, 0.0, 1.0, 0.0},
                                            {0.0, 0.0, 0.0, 0.0}});
        Matrix go_right = Matrix::from_rows({{0.0, 0.0, 0.0, 0.0},
                                             {0.0, 1.0, 0.0, 0.0},
                                             {1.0, 0.0, 1.0, 1.0},
                                             {0.0, 0.0, 0.0, 0.0}});
        GenerativeProcess env(A_star, {go_left, go_right},
                              Categorical({0.5, 0.0, 0.0, 0.5}));

        // Agent sees three concepts: center, left, right.
        const std::size_t T = 2;
        DirichletCounts counts;
        counts.a = Matrix::from_rows({{2.0, 0.1, 0.1},
                                      {0.1, 2.0, 0.1},
                                      {0.1, 0.1, 2.0}});
        counts.b = {Matrix(3, 3, 0.25), Matrix(3, 3, 0.25)};
        counts.d = {2.0, 0.5, 0.5};
        std::vector<Categorical> C{Categorical::uniform(3),
                                   Categorical({0.1, 0.8, 0.1})};
        std::vector<Policy> policies = enumerate_policies(2, T - 1);
        GenerativeModel agent = expected_model(counts, 8.0, T, C, policies);

        RegimeConfig regime{.loop_I_learning = true, .loop_II = true,
                            .loop_I_frozen_in_use = true};
        return Scenario{std::move(env), std::move(agent), std::move(counts),
                        regime, 100, 50, 11};
    }

    if (name == "cue-conditional") {
        // States: 0 cue-A start, 1 cue-B start, 2 reward, 3 empty. The
        // rewarding action flips with the cue. Stimuli: 0 cue A, 1 cue B,
        // 2 reward, 3 neutral.
        Matrix A_star = Matrix::from_rows({{1.0, 0.0, 0.0, 0.0},
                                           {0.0, 1.0, 0.0, 0.0},
                                           {0.0, 0.0, 1.0, 0.0},
                                           {0.0, 0.0, 0.0, 1.0}});
        Matrix act0 = Matrix::from_rows({{0.0, 0.0, 0.0, 0.0},
                                         {0.0, 0.0, 0.0, 0.0},
                                         {1.0, 0.0, 1.0, 0.0},
                                         {0.0, 1.0, 0.0, 1.0}});
        Matrix act1 = Matrix::from_rows({{0.0, 0.0, 0.0, 0.0},
                                         {0.0, 0.0, 0.0, 0.0},
                                         {0.0, 1.0, 1.0, 0.0},
                                         {1.0, 0.0, 0.0, 1.0}});
        GenerativeProcess env(A_star, {act0, act1},
                              Categorical({0.5, 0.5, 0.0, 0.0}));

        const std::size_t T = 3;
        DirichletCounts counts;
        counts.a = Matrix(4, 4, 0.05);
        for (std::size_t i = 0; i < 4; ++i) counts.a(i, i) = 2.0;
        counts.b = {Matrix(4, 4, 0.25), Matrix(4, 4, 0.25)};
        counts.d = {1.0, 1.0, 0.2, 0.2};
        std::vector<Categorical> C{Categorical::uniform(4),
                                   Categorical({0.05, 0.05, 0.85, 0.05}),
                                   Categorical({0.05, 0.05, 0.85, 0.05})};
        std::vector<Policy> policies = enumerate_policies(2, T - 1);
        GenerativeModel agent = expected_model(counts, 8.0, T, C, policies);

        RegimeConfig regime{.loop_I_learning = true, .loop_II = true,
                            .loop_I_frozen_in_use = false};
        return Scenario{std::move(env), std::move(agent), std::move(counts),
                        regime, 150, 50, 3};
    }

    throw std::invalid_argument(
        "fixture: unknown name '" + name +
        "'; available: discrimination-2x2, tmaze, cue-conditional");
}

} // namespace kge
