#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kge/semnet.hpp"
#include "oracles.hpp"

using namespace kge;
using Catch::Approx;

namespace {

ConceptStimulusMatrix binary(const std::vector<std::vector<double>>& rows) {
    return ConceptStimulusMatrix(Matrix::from_rows(rows), MatrixMode::Binary);
}

} // namespace

TEST_CASE("induced joint distributes mass over links") {
    const JointDistribution id = induced_joint(binary({{1, 0}, {0, 1}}));
    CHECK(id.probs()(0, 0) == 0.5);
    CHECK(id.probs()(0, 1) == 0.0);
    CHECK(id.probs()(1, 1) == 0.5);

    const JointDistribution ones = induced_joint(binary({{1, 1}, {1, 1}}));
    for (double v : ones.probs().data()) CHECK(v == 0.25);

    const JointDistribution w = induced_joint(ConceptStimulusMatrix(
        Matrix::from_rows({{2, 1}, {0, 1}}), MatrixMode::Weighted));
    // rows of the joint are concepts; entries() rows are stimuli
    CHECK(w.probs()(0, 0) == 0.5);
    CHECK(w.probs()(0, 1) == 0.0);
    CHECK(w.probs()(1, 0) == 0.25);
    CHECK(w.probs()(1, 1) == 0.25);
}

TEST_CASE("matrix construction rejects invalid input") {
    CHECK_THROWS_AS(binary({{0, 0}, {0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(binary({{0.5, 0}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(ConceptStimulusMatrix(Matrix::from_rows({{-1.0, 1.0}}),
                                          MatrixMode::Weighted),
                    std::invalid_argument);
}

TEST_CASE("transfer energy endpoints and affine structure") {
    const auto csm = binary({{1, 1, 0}, {0, 1, 0}, {0, 0, 1}});
    const auto joint = induced_joint(csm);
    const double H = entropy_raw(joint.row_marginal());
    const double I = mutual_information(joint);

    CHECK(transfer_energy(csm, 0.0).omega == Approx(H).margin(1e-12));
    CHECK(transfer_energy(csm, 1.0).omega == Approx(-I).margin(1e-12));
    CHECK_FALSE(transfer_energy(csm, 0.0).a_omega.has_value());
    CHECK_FALSE(transfer_energy(csm, 0.0).scaled_omega.has_value());

    // affine in lambda: check 5 interior points against the endpoint chord
    for (double lambda : {0.1, 0.25, 0.41, 0.6, 0.9}) {
        const TransferEnergyReport rep = transfer_energy(csm, lambda);
        CHECK(rep.omega == Approx(H - lambda * (I + H)).margin(1e-10));
        CHECK(*rep.a_omega == Approx(1.0 / lambda - 1.0).margin(1e-12));
        CHECK(*rep.scaled_omega == Approx(rep.omega / lambda).margin(1e-10));
    }

    CHECK_THROWS_AS(transfer_energy(csm, -0.1), std::domain_error);
    CHECK_THROWS_AS(transfer_energy(csm, 1.1), std::domain_error);
}

TEST_CASE("transfer energy of the 2x2 fixture joint at lambda 0.41") {
    // weighted matrix inducing the joint [[0.4,0.1],[0.1,0.4]]
    const ConceptStimulusMatrix csm(Matrix::from_rows({{4, 1}, {1, 4}}),
                                    MatrixMode::Weighted);
    const TransferEnergyReport rep = transfer_energy(csm, 0.41);
    const double I = oracle::mutual_information({{0.4, 0.1}, {0.1, 0.4}});
    CHECK(rep.information == Approx(I).margin(1e-12));
    CHECK(rep.omega == Approx(-0.41 * I + 0.59 * std::log(2.0)).margin(1e-12));
    CHECK(rep.omega == Approx(0.329931).margin(1e-6));
}

TEST_CASE("machine transfer energy is the mutual information") {
    Rng rng(5);
    const auto pr = oracle::random_distribution(2, rng);
    const auto pc = oracle::random_distribution(2, rng);
    Matrix indep(2, 2);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) indep(r, c) = pr[r] * pc[c];
    CHECK(machine_transfer_energy(
              ConceptStimulusMatrix(indep, MatrixMode::Weighted)) ==
          Approx(0.0).margin(1e-12));

    CHECK(machine_transfer_energy(binary({{1, 0}, {0, 1}})) ==
          Approx(std::log(2.0)).margin(1e-12));
    CHECK(machine_transfer_energy(ConceptStimulusMatrix(
              Matrix::from_rows({{4, 1}, {1, 4}}), MatrixMode::Weighted)) ==
          Approx(0.192745).margin(1e-6));
}

TEST_CASE("similarity matrix") {
    // concepts are columns; stimuli rows
    const auto csm = binary({{1, 1, 1}, {1, 1, 0}, {0, 0, 1}});
    const Matrix sim = similarity_matrix(csm);
    CHECK(sim(0, 1) == Approx(1.0).margin(1e-12)); // identical stimulus sets
    CHECK(sim(0, 2) == Approx(1.0 / 2.0).margin(1e-12));
    for (std::size_t i = 0; i < 3; ++i) CHECK(sim(i, i) == Approx(1.0).margin(1e-12));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(sim(i, j) == Approx(sim(j, i)).margin(1e-12));
            CHECK(sim(i, j) >= 0.0);
            CHECK(sim(i, j) <= 1.0 + 1e-12);
        }

    const Matrix disjoint = similarity_matrix(binary({{1, 0}, {0, 1}}));
    CHECK(disjoint(0, 1) == 0.0);
}

TEST_CASE("zero-stimulus concept has zero similarity, including diagonal") {
    const auto csm = binary({{1, 0}, {1, 0}});
    const Matrix sim = similarity_matrix(csm);
    CHECK(sim(1, 1) == 0.0);
    CHECK(sim(0, 1) == 0.0);
    CHECK(sim(0, 0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("synsets group concepts sharing all stimuli") {
    const auto singletons = synsets(binary({{1, 0}, {0, 1}}));
    REQUIRE(singletons.size() == 2);

    const auto pair = synsets(binary({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}));
    REQUIRE(pair.size() == 2);
    CHECK(pair[0] == std::vector<std::size_t>{0, 1});
    CHECK(pair[1] == std::vector<std::size_t>{2});

    // every concept appears exactly once
    std::vector<bool> seen(3, false);
    for (const auto& g : pair)
        for (std::size_t c : g) {
            CHECK_FALSE(seen[c]);
            seen[c] = true;
        }

    // synset members have pairwise similarity exactly 1
    const Matrix sim = similarity_matrix(binary({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}));
    CHECK(sim(0, 1) == Approx(1.0).margin(1e-12));

    CHECK_THROWS_AS(synsets(ConceptStimulusMatrix(Matrix::from_rows({{2, 1}}),
                                                  MatrixMode::Weighted)),
                    std::domain_error);
}

TEST_CASE("omega weakly decreases when information rises at fixed H(S)") {
    // Both matrices have uniform concept marginals (H = ln 2); the identity
    // carries ln 2 of information, the all-ones matrix none.
    const auto high_I = binary({{1, 0}, {0, 1}});
    const auto low_I = binary({{1, 1}, {1, 1}});
    for (double lambda : {0.2, 0.41, 1.0}) {
        const auto hi = transfer_energy(high_I, lambda);
        const auto lo = transfer_energy(low_I, lambda);
        CHECK(hi.concept_entropy == Approx(lo.concept_entropy).margin(1e-12));
        CHECK(hi.information > lo.information);
        CHECK(hi.omega <= lo.omega);
    }
}

TEST_CASE("optimize_matrix matches the exhaustive oracle at 2x2") {
    Rng rng(31);
    const double opt0 = oracle::exhaustive_min_omega(2, 2, 0.0);
    CHECK(opt0 == Approx(0.0).margin(1e-12));
    auto [m0, r0] = optimize_matrix(2, 2, 0.0, rng, 8);
    CHECK(r0.omega == Approx(opt0).margin(1e-9));

    const double opt1 = oracle::exhaustive_min_omega(2, 2, 1.0);
    CHECK(opt1 == Approx(-std::log(2.0)).margin(1e-12));
    auto [m1, r1] = optimize_matrix(2, 2, 1.0, rng, 8);
    CHECK(r1.omega == Approx(opt1).margin(1e-9));

    // reported energy matches transfer_energy of the returned matrix
    CHECK(r1.omega == Approx(transfer_energy(m1, 1.0).omega).margin(1e-12));
}

TEST_CASE("optimize_matrix reaches the exhaustive 3x3 optimum at 0.41") {
    Rng rng(77);
    const double opt = oracle::exhaustive_min_omega(3, 3, 0.41);
    auto [m, r] = optimize_matrix(3, 3, 0.41, rng, 8);
    CHECK(r.omega == Approx(opt).margin(1e-9));
}
