#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "fisherbound/mle_lab.hpp"
#include "oracles.hpp"

using namespace fisherbound;

TEST(PauliMle, Examples) {
    EigenvalueVector all = mle_pauli_eigenvalues(std::vector<double>{7, 0, 0, 0}, 1);
    EXPECT_EQ(all.values(), (std::vector<double>{1, 1, 1, 1}));
    EigenvalueVector unif = mle_pauli_eigenvalues(std::vector<double>(16, 3.0), 2);
    EXPECT_EQ(unif[0], 1.0);
    for (size_t a = 1; a < 16; ++a) {
        EXPECT_EQ(unif[a], 0.0);
    }
    EigenvalueVector l = mle_pauli_eigenvalues(std::vector<double>{3, 1, 0, 0}, 1);
    auto ref = oracle::naive_wht({0.75, 0.25, 0, 0}, 1);
    for (size_t a = 0; a < 4; ++a) {
        EXPECT_NEAR(l[a], ref[a], 1e-15);
    }
    EXPECT_THROW(mle_pauli_eigenvalues(std::vector<double>{0, 0, 0, 0}, 1), std::invalid_argument);
}

TEST(PauliMle, ExactFrequenciesRecoverTruth) {
    std::mt19937_64 rng(1);
    for (int n = 1; n <= 3; ++n) {
        auto m = entangled_pauli_model(n);
        for (int i = 0; i < 10; ++i) {
            auto lam = random_channel_eigenvalues(n, rng);
            EigenvalueVector est = mle_pauli_eigenvalues(m->probabilities(lam), n);
            for (size_t a = 1; a < est.size(); ++a) {
                EXPECT_NEAR(est[a], lam[a - 1], 1e-12);
            }
        }
    }
}

TEST(ClassicalMle, Values) {
    Observation o;
    o.m = 10;
    o.counts = {5, 5};
    EXPECT_EQ(mle_classical(Scheme::Bernoulli, o).theta[0], 0.5);
    Observation mo;
    mo.m = 8;
    mo.counts = {2, 4, 2};
    auto t = mle_classical(Scheme::Multinomial, mo).theta;
    EXPECT_EQ(t, (std::vector<double>{0.25, 0.5}));
}

TEST(Trials, VacuousAndDeterministic) {
    auto m = entangled_pauli_model(1);
    std::vector<double> id{1, 1, 1};
    Rng s = make_stream(1, 1, 1);
    EXPECT_TRUE(run_trial(*m, id, 10, 1e-9, Norm::Linf, s).success);
    std::vector<double> dep{0, 0, 0};
    TrialOutcome inf = run_trial(*m, dep, 3, std::numeric_limits<double>::infinity(), Norm::L2, s);
    EXPECT_TRUE(inf.success);
    EXPECT_GE(inf.error_l2, inf.error_linf);

    Rng a = make_stream(5, 100, 0), b = make_stream(5, 100, 0);
    TrialOutcome ta = run_trial(*m, dep, 100, 0.3, Norm::Linf, a);
    TrialOutcome tb = run_trial(*m, dep, 100, 0.3, Norm::Linf, b);
    EXPECT_EQ(ta.estimate, tb.estimate);
    EXPECT_EQ(ta.success, tb.success);
    EXPECT_EQ(ta.success, ta.error_linf <= 0.3);
}

TEST(Wilson, Interval) {
    WilsonInterval w = wilson_interval(100, 100);
    EXPECT_EQ(w.hi, 1.0);
    EXPECT_NEAR(w.lo, 1.0 - 1.96 * 1.96 / (100 + 1.96 * 1.96), 1e-3);
    WilsonInterval h = wilson_interval(50, 100);
    EXPECT_NEAR(h.lo + h.hi, 1.0, 1e-12);
    EXPECT_THROW(wilson_interval(1, 0), std::invalid_argument);
}

TEST(SuccessProbability, DeterministicAndSelfConsistent) {
    auto m = entangled_pauli_model(1);
    SuccessEstimate det = success_probability(*m, std::vector<double>{1, 1, 1}, 5, 0.01, Norm::Linf, 200, 1);
    EXPECT_EQ(det.rate, 1.0);
    EXPECT_EQ(det.ci.hi, 1.0);
    EXPECT_THROW(success_probability(*m, std::vector<double>{0, 0, 0}, 5, 0.1, Norm::Linf, 0, 1),
                 std::invalid_argument);

    std::vector<double> dep{0, 0, 0};
    SuccessEstimate a = success_probability(*m, dep, 200, 0.5, Norm::Linf, 2000, 1);
    SuccessEstimate b = success_probability(*m, dep, 200, 0.5, Norm::Linf, 2000, 99);
    EXPECT_GE(b.rate, a.ci.lo);
    EXPECT_LE(b.rate, a.ci.hi);
}

TEST(SuccessProbability, MatchesExactBinomial) {
    BernoulliModel b;
    for (uint64_t m : {3u, 10u, 40u}) {
        double exact = oracle::binomial_success(m, 0.3, 0.1);
        SuccessEstimate s = success_probability(b, std::vector<double>{0.3}, m, 0.1, Norm::Linf, 4000, 7, 0.999);
        EXPECT_GE(exact, s.ci.lo) << m;
        EXPECT_LE(exact, s.ci.hi) << m;
    }
}

TEST(FindMinSamples, BernoulliAgainstExactEnumeration) {
    BernoulliModel b;
    SearchOptions opt;
    opt.trials = 2000;
    MinSamplesResult r = find_min_samples(b, std::vector<double>{0.5}, 0.4, 0.1, Norm::Linf, opt);
    EXPECT_LT(r.m_star, 10u);
    EXPECT_GE(r.at_m_star.ci.lo, 0.9);
    EXPECT_EQ(r.bracket_hi, r.m_star);
    EXPECT_EQ(r.bracket_hi - r.bracket_lo, r.m_star > 1 ? 1u : r.m_star);
    // The first M whose exact success probability reaches 0.9 cannot exceed m_star by
    // more than Wilson noise; m_star itself must have exact probability close to 0.9 or above.
    EXPECT_GE(oracle::binomial_success(r.m_star, 0.5, 0.4), 0.88);

    MinSamplesResult wide = find_min_samples(b, std::vector<double>{0.5}, 2.0, 0.1, Norm::Linf, opt);
    EXPECT_EQ(wide.m_star, 1u);
}

TEST(FindMinSamples, DeterministicAcrossThreads) {
    auto m = entangled_pauli_model(1);
    SearchOptions opt;
    opt.trials = 400;
    opt.threads = 1;
    MinSamplesResult a = find_min_samples(*m, std::vector<double>{0, 0, 0}, 0.2, 0.2, Norm::Linf, opt);
    opt.threads = 4;
    MinSamplesResult b = find_min_samples(*m, std::vector<double>{0, 0, 0}, 0.2, 0.2, Norm::Linf, opt);
    EXPECT_EQ(a.m_star, b.m_star);
    EXPECT_EQ(a.at_m_star.successes, b.at_m_star.successes);
    EXPECT_EQ(a.probes.size(), b.probes.size());
    EXPECT_EQ(a.at_double.successes, b.at_double.successes);
}

TEST(FindMinSamples, BudgetExceeded) {
    auto m = entangled_pauli_model(1);
    SearchOptions opt;
    opt.trials = 100;
    opt.m_max = 16;
    try {
        find_min_samples(*m, std::vector<double>{0, 0, 0}, 0.01, 0.1, Norm::Linf, opt);
        FAIL() << "expected BudgetExceeded";
    } catch (const BudgetExceeded &e) {
        EXPECT_FALSE(e.partial().probes.empty());
    }
}

TEST(MseVsCrb, GaussianExact) {
    GaussianKnownVarModel g(Eigen::MatrixXd::Identity(2, 2) * 3.0);
    for (uint64_t m : {1u, 7u, 1000u}) {
        for (const MseRow &r : mse_vs_crb(g, std::vector<double>{1.0, -2.0}, m, 20000, 3)) {
            EXPECT_NEAR(r.crb, 3.0 / static_cast<double>(m), 1e-14);
            EXPECT_NEAR(r.ratio, 1.0, 5 * std::sqrt(2.0 / 20000));
        }
    }
}

TEST(MseVsCrb, UnbiasedTrend) {
    auto m = entangled_pauli_model(1);
    std::vector<double> th{0.3, -0.2, 0.1};
    const uint64_t trials = 2000;
    for (uint64_t mm : {100u, 1000u, 10000u}) {
        for (const MseRow &r : mse_vs_crb(*m, th, mm, trials, 11)) {
            EXPECT_LE(std::abs(r.bias), 4.0 * std::sqrt(r.crb / trials));
        }
    }
}

TEST(Threads, Resolution) {
    EXPECT_EQ(resolve_threads(3), 3);
    setenv("FISHERBOUND_THREADS", "2", 1);
    EXPECT_EQ(resolve_threads(0), 2);
    unsetenv("FISHERBOUND_THREADS");
    EXPECT_GE(resolve_threads(0), 1);
}
