#include <hydrores/reservoir.hpp>
#include <hydrores/tasks.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace hydrores;

namespace {

// Leibniz expansion, independent of any factorization.
double leibniz_det(const Eigen::MatrixXd& m) {
    const auto n = static_cast<int>(m.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double det = 0.0;
    do {
        int inversions = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
        double term = inversions % 2 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) term *= m(i, perm[static_cast<std::size_t>(i)]);
        det += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

Eigen::MatrixXd random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    return m;
}

std::vector<double> as_vector(const Eigen::RowVectorXd& r) { return {r.data(), r.data() + r.size()}; }

Reservoir xnor_reservoir(Scheme s = Scheme::Amplitude) { return Reservoir(ReservoirConfig{}, xnor_dataset(), s); }

} // namespace

TEST(Fitness, KnownDeterminants) {
    EXPECT_DOUBLE_EQ(fitness({Eigen::MatrixXd::Identity(4, 4)}), 1.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    EXPECT_DOUBLE_EQ(fitness({d}), 6.0);
    std::mt19937_64 rng(1);
    Eigen::MatrixXd m = random_matrix(4, rng);
    m.row(2) = m.row(0);
    EXPECT_EQ(fitness({m}), 0.0);
}

TEST(Fitness, MatchesLeibnizAndIgnoresRowOrder) {
    std::mt19937_64 rng(3);
    for (std::size_t n : {2u, 3u, 4u, 6u}) {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd m = random_matrix(n, rng);
            const double ref = std::abs(leibniz_det(m));
            EXPECT_NEAR(fitness({m}), ref, 1e-12 * std::max(1.0, ref));
            Eigen::MatrixXd swapped = m;
            swapped.row(0).swap(swapped.row(static_cast<Eigen::Index>(n - 1)));
            EXPECT_NEAR(fitness({swapped}), fitness({m}), 1e-12 * std::max(1.0, ref));
        }
    }
}

TEST(Fitness, RejectsNonSquare) { EXPECT_THROW(fitness({Eigen::MatrixXd::Ones(2, 3)}), ArgumentError); }

TEST(Train, IdentityAndDiagonal) {
    const std::vector<double> y{1, 0, 0, 1};
    const auto w = train({Eigen::MatrixXd::Identity(4, 4)}, y);
    EXPECT_TRUE(w.exact);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(static_cast<double>(w.weights(static_cast<Eigen::Index>(i))), y[i]);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const std::vector<double> y2{2, 8};
    const auto w2 = train({d}, y2);
    EXPECT_DOUBLE_EQ(static_cast<double>(w2.weights(0)), 1.0);
    EXPECT_DOUBLE_EQ(static_cast<double>(w2.weights(1)), 2.0);
}

TEST(Train, RecoversKnownWeights) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd r = random_matrix(4, rng);
        const Eigen::VectorXd w_true = random_matrix(4, rng).col(0);
        const Eigen::VectorXd yv = r * w_true;
        const std::vector<double> y(yv.data(), yv.data() + yv.size());
        const auto w = train({r}, y);
        ASSERT_TRUE(w.exact);
        for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(static_cast<double>(w.weights(j)), w_true(j), 1e-10);
        EXPECT_LT(w.residual, 1e-12);
    }
}

TEST(Train, SingularFallsBackToMinimumNorm) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(0, 0) = 1.0;
    r(1, 0) = 1.0;  // identical rows
    const std::vector<double> y{1.0, 3.0};
    const auto w = train({r}, y);
    EXPECT_FALSE(w.exact);
    EXPECT_NEAR(static_cast<double>(w.weights(0)), 2.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(w.weights(1)), 0.0, 1e-12);
    EXPECT_NEAR(w.residual, 1.0, 1e-12);
}

TEST(LinearReadout, ZeroWeightsPredictZero) {
    LinearReadout w;
    w.weights = Eigen::Matrix<long double, 1, Eigen::Dynamic>::Zero(3);
    const std::vector<double> r{4.0, -2.0, 7.5};
    EXPECT_EQ(w.apply(r), 0.0);
    const std::vector<double> wrong{1.0};
    EXPECT_THROW(w.apply(wrong), ArgumentError);
}

TEST(Reservoir, XnorMatrixShapeAndDeterminism) {
    const auto res = xnor_reservoir();
    std::mt19937_64 rng(21);
    const auto g = Genotype::random(Scheme::Amplitude, res.num_readouts(), res.num_encoding_genes(), rng);
    const auto r1 = res.build_readout_matrix(g);
    const auto r2 = res.build_readout_matrix(g);
    EXPECT_EQ(r1.values.rows(), 4);
    EXPECT_EQ(r1.values.cols(), 4);
    EXPECT_TRUE(r1.values == r2.values);
    EXPECT_EQ(res.evaluate(g).fitness, res.evaluate(g).fitness);
}

TEST(Reservoir, ZeroAmplitudeIsRankOne) {
    const auto res = xnor_reservoir();
    const Genotype g{Scheme::Amplitude, {0.1, 0.3, 0.5, 0.7}, std::vector<double>(6, 0.0)};
    const auto r = res.build_readout_matrix(g);
    for (Eigen::Index i = 1; i < 4; ++i) EXPECT_TRUE(r.values.row(i) == r.values.row(0));
    EXPECT_EQ(res.evaluate(g).fitness, 0.0);
}

TEST(Reservoir, DuplicateObservationsRejected) {
    std::vector<std::vector<double>> x{{0, 0}, {0, 1}, {0, 0}, {1, 1}};
    EXPECT_THROW(Dataset(x, {1, 0, 1, 1}, FeatureSpec{{Discrete{2}, Discrete{2}}}), ArgumentError);
}

TEST(Reservoir, RejectsMismatchedGenotypes) {
    const auto res = xnor_reservoir();
    EXPECT_THROW(res.build_readout_matrix(Genotype{Scheme::Frequency, {0, 0, 0, 0}, std::vector<double>(6, 0.5)}),
                 ConfigurationError);
    EXPECT_THROW(res.build_readout_matrix(Genotype{Scheme::Amplitude, {0, 0, 0}, std::vector<double>(6, 0.5)}),
                 ConfigurationError);
    EXPECT_THROW(res.build_readout_matrix(Genotype{Scheme::Amplitude, {0, 0, 0, 0}, std::vector<double>(5, 0.5)}),
                 ConfigurationError);
}

TEST(Reservoir, DivergenceScoresZero) {
    ReservoirConfig cfg;
    cfg.solver.blowup_threshold = 2.5;  // any appreciable input wave on the soliton trips this
    const Reservoir res(cfg, xnor_dataset(), Scheme::Amplitude);
    const Genotype g{Scheme::Amplitude, {0.1, 0.2, 0.3, 0.4}, std::vector<double>(6, 1.0)};
    const auto r = res.evaluate(g);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.fitness, 0.0);
    EXPECT_FALSE(std::isnan(r.fitness));
    EXPECT_FALSE(r.descriptor_samples.empty());
}

TEST(Reservoir, DescriptorSamplesAreEncodedAmplitudes) {
    const auto res = xnor_reservoir();
    const Genotype g{Scheme::Amplitude, {0.1, 0.2, 0.3, 0.4}, {0.2, 0.4, 0.6, 0.8, 0.1, 0.3}};
    const auto s = res.descriptor_samples(g);
    const EncodingBounds b{};
    // (0,0) (0,1) (1,0) (1,1), two waves each.
    const std::vector<double> expected{b.amplitude(0.4), b.amplitude(0.1), b.amplitude(0.4), b.amplitude(0.3),
                                       b.amplitude(0.6), b.amplitude(0.1), b.amplitude(0.6), b.amplitude(0.3)};
    ASSERT_EQ(s.size(), expected.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(s[i], expected[i]);
}

TEST(Reservoir, PredictReproducesTrainingTargets) {
    const auto res = xnor_reservoir();
    std::mt19937_64 rng(4);
    int checked = 0;
    for (int trial = 0; trial < 20 && checked < 5; ++trial) {
        const auto g = Genotype::random(Scheme::Amplitude, 4, 6, rng);
        const auto w = res.train(g);
        if (!w.exact) continue;
        ++checked;
        for (std::size_t i = 0; i < 4; ++i)
            EXPECT_NEAR(res.predict(w, g, res.dataset().observations()[i]), res.dataset().targets()[i], 1e-8);
    }
    EXPECT_GT(checked, 0);
}

TEST(Reservoir, RowsMatchIndependentSimulations) {
    const auto res = xnor_reservoir();
    std::mt19937_64 rng(8);
    const auto g = Genotype::random(Scheme::Amplitude, 4, 6, rng);
    const auto r = res.build_readout_matrix(g);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(as_vector(r.values.row(static_cast<Eigen::Index>(i))), res.observe(g, res.dataset().observations()[i]));
}
