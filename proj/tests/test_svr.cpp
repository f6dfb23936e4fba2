#include "aadt/svr.hpp"

#include "qp_oracle.hpp"
#include "svr_checks.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace aadt;
using namespace aadt::svr;

namespace {

std::vector<double> full_beta(const SvrModel& m)
{
    std::vector<double> beta(m.training_size, 0.0);
    for (std::size_t k = 0; k < m.support_indices.size(); ++k) beta[m.support_indices[k]] = m.coefficients[k];
    return beta;
}

SolverOptions tight(double tol = 1e-10)
{
    SolverOptions o;
    o.tol = tol;
    return o;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

} // namespace

// --- kernel ---------------------------------------------------------------

TEST(Kernel, ClosedFormValues)
{
    const std::vector<double> a{0.0, 0.0}, b{2.0, 0.0}, c{1.0, 1.0};
    EXPECT_DOUBLE_EQ(rbf_kernel(a, a, 3.7), 1.0);
    EXPECT_NEAR(rbf_kernel(a, b, 0.25), 0.3678794, 1e-7);
    EXPECT_NEAR(rbf_kernel(a, c, 0.5), 0.3678794, 1e-7);
    EXPECT_DOUBLE_EQ(rbf_kernel(a, b, 0.25), std::exp(-1.0));
}

TEST(Kernel, SymmetricAndBounded)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = u(rng);
        const double g = std::exp2(u(rng));
        const double k = rbf_kernel(x, y, g);
        EXPECT_EQ(k, rbf_kernel(y, x, g));
        EXPECT_GE(k, 0.0);
        EXPECT_LE(k, 1.0);
    }
}

TEST(Kernel, DimensionMismatch)
{
    try {
        rbf_kernel(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionMismatch);
    }
}

TEST(Kernel, GramIsPositiveSemidefinite)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng() % 19;
        std::vector<FeatureVector> x(n, FeatureVector(4));
        for (auto& r : x)
            for (auto& v : r) v = u(rng);
        const auto gram = rbf_gram(squared_distances(x), std::exp2(-3.0 + 6.0 * u(rng)));
        Eigen::MatrixXd m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gram(i, j);
                ASSERT_EQ(gram(i, j), gram(j, i));
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

// --- scaling --------------------------------------------------------------

TEST(Scaling, SingleSampleMapsVolumesToZero)
{
    DaySample s;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) s.volumes[h] = 10.0 * static_cast<double>(h);
    const std::vector<DaySample> samples{s};
    const std::vector<double> targets{5000.0};
    const auto p = fit_scaling(samples, targets);
    const auto f = make_features(s, p);
    ASSERT_EQ(f.size(), kFeatureDim);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) EXPECT_EQ(f[h], 0.0);
}

TEST(Scaling, MidpointAndTargetScale)
{
    DaySample a, b, mid;
    a.volumes.fill(0.0);
    b.volumes.fill(200.0);
    mid.volumes.fill(100.0);
    const std::vector<DaySample> samples{a, b};
    const std::vector<double> targets{1000.0, 4000.0};
    const auto p = fit_scaling(samples, targets);
    EXPECT_EQ(p.target_scale, 4000.0);
    EXPECT_EQ(p.scale_target(1000.0), 0.25);
    EXPECT_EQ(p.scale_target(4000.0), 1.0);
    EXPECT_EQ(p.scale_volume(0, 100.0), 0.5);
    EXPECT_EQ(make_features(mid, p)[5], 0.5);
}

TEST(Scaling, OneHotBlocks)
{
    DaySample s;
    s.weekday = 3;
    s.month = 11;
    ScalingParams p;
    const auto f = make_features(s, p);
    double wsum = 0.0, msum = 0.0;
    for (std::size_t k = 0; k < kWeekdays; ++k) wsum += f[kHoursPerDay + k];
    for (std::size_t k = 0; k < kMonths; ++k) msum += f[kHoursPerDay + kWeekdays + k];
    EXPECT_EQ(wsum, 1.0);
    EXPECT_EQ(msum, 1.0);
    EXPECT_EQ(f[kHoursPerDay + 3], 1.0);
    EXPECT_EQ(f[kHoursPerDay + kWeekdays + 10], 1.0);
}

TEST(Scaling, TargetRoundTrip)
{
    ScalingParams p;
    p.target_scale = 61234.0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = std::max(1e-3, u(rng)) * p.target_scale;
        EXPECT_LE(std::abs(p.unscale_target(p.scale_target(t)) - t), 1e-12 * t);
    }
}

TEST(Scaling, Errors)
{
    EXPECT_THROW(fit_scaling(std::vector<DaySample>{}, std::vector<double>{}), Error);
    DaySample s;
    s.volumes[3] = std::nan("");
    try {
        fit_scaling(std::vector<DaySample>{s}, std::vector<double>{1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonFiniteInput);
    }
}

// --- solver ---------------------------------------------------------------

TEST(Solver, FlatDataInsideTubeHasNoSupportVectors)
{
    std::vector<FeatureVector> x{{0.0, 0.1}, {0.5, 0.2}, {0.9, 0.7}, {0.3, 0.3}};
    std::vector<double> y{0.503, 0.497, 0.5, 0.5}; // symmetric about 0.5, all within eps
    const auto m = smo_train(x, y, SvrHyperparams{1.0, 1.0, 0.01}, tight());
    EXPECT_TRUE(m.support_vectors.empty());
    EXPECT_NEAR(m.bias, 0.5, 1e-12);
    EXPECT_EQ(dual_objective(m, x, y), 0.0);
    for (const auto& xi : x) EXPECT_NEAR(m.decision(xi), 0.5, 1e-12);
}

TEST(Solver, TwoSymmetricPointsMatchOracle)
{
    const std::vector<FeatureVector> x{{0.0, 0.0}, {1.0, 0.5}};
    const std::vector<double> y{0.4, -0.4};
    const SvrHyperparams hp{100.0, 0.7, 0.05};
    const auto m = smo_train(x, y, hp, tight());
    const auto beta = full_beta(m);
    EXPECT_NEAR(beta[0], -beta[1], 1e-12);
    EXPECT_GT(beta[0], 0.0);

    const auto q = oracle::solve_svr_dual(x, y, hp.c, hp.gamma, hp.epsilon);
    EXPECT_LE(rel_diff(dual_objective(m, x, y), q.objective), 1e-6);
    // Closed form for two points: beta = (v - eps) / (1 - k).
    const double k = std::exp(-0.7 * 1.25);
    EXPECT_NEAR(beta[0], (0.4 - 0.05) / (1.0 - k), 1e-8);
}

TEST(Solver, FivePointsMatchOracle)
{
    std::mt19937_64 rng(5);
    auto inst = checks::random_instance(rng, 5, 3);
    const SvrHyperparams hp{inst.c, inst.gamma, inst.eps};
    const auto m = smo_train(inst.x, inst.y, hp, tight());
    const auto q = oracle::solve_svr_dual(inst.x, inst.y, inst.c, inst.gamma, inst.eps);
    EXPECT_LE(rel_diff(dual_objective(m, inst.x, inst.y), q.objective), 1e-6);
    for (const auto& xi : inst.x) EXPECT_NEAR(m.decision(xi), oracle::predict(q, inst.x, inst.gamma, xi), 1e-5);
}

TEST(Solver, RandomInstancesMatchOracle)
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 2 + rng() % 9, d = 1 + rng() % 5;
        auto inst = checks::random_instance(rng, n, d);
        const SvrHyperparams hp{inst.c, inst.gamma, inst.eps};
        const auto m = smo_train(inst.x, inst.y, hp, tight());
        const auto q = oracle::solve_svr_dual(inst.x, inst.y, inst.c, inst.gamma, inst.eps);
        ASSERT_LE(rel_diff(dual_objective(m, inst.x, inst.y), q.objective), 1e-6) << "instance " << t;
        for (const auto& xi : inst.x)
            ASSERT_NEAR(m.decision(xi), oracle::predict(q, inst.x, inst.gamma, xi), 1e-5) << "instance " << t;
    }
}

TEST(Solver, KktConditionsHoldAfterTraining)
{
    std::mt19937_64 rng(7);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 8;
        auto inst = checks::random_instance(rng, n, d);
        const auto m = smo_train(inst.x, inst.y, SvrHyperparams{inst.c, inst.gamma, inst.eps});
        const auto beta = full_beta(m);
        const auto r = checks::kkt(inst.x, inst.y, beta, inst.c, inst.gamma, inst.eps);
        EXPECT_LE(std::abs(r.sum_beta), 1e-9);
        EXPECT_LE(r.max_abs_beta, inst.c + 1e-12);
        EXPECT_LE(r.max_violation, 1e-3 + 1e-9);
        EXPECT_EQ(m.support_vectors.size(), m.coefficients.size());
        for (double b : m.coefficients) EXPECT_NE(b, 0.0);
    }
}

TEST(Solver, NonSupportVectorsLieInsideTube)
{
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        auto inst = checks::random_instance(rng, 30, 3);
        const double tol = 1e-3;
        const auto m = smo_train(inst.x, inst.y, SvrHyperparams{inst.c, inst.gamma, inst.eps});
        const auto beta = full_beta(m);
        for (std::size_t i = 0; i < inst.x.size(); ++i)
            if (beta[i] == 0.0) {
                EXPECT_LE(std::abs(m.decision(inst.x[i]) - inst.y[i]), inst.eps + tol + 1e-12);
            }
    }
}

TEST(Solver, ObjectiveIsNonDecreasing)
{
    std::mt19937_64 rng(9);
    for (int t = 0; t < 10; ++t) {
        auto inst = checks::random_instance(rng, 40, 4);
        std::vector<double> trace;
        SolverOptions opt = tight(1e-8);
        opt.on_iteration = [&](std::uint64_t, double obj) { trace.push_back(obj); };
        const auto m = smo_train(inst.x, inst.y, SvrHyperparams{inst.c, inst.gamma, inst.eps}, opt);
        ASSERT_FALSE(trace.empty());
        EXPECT_EQ(trace.size(), m.iterations);
        EXPECT_GT(trace.front(), 0.0);
        for (std::size_t k = 1; k < trace.size(); ++k) ASSERT_GE(trace[k], trace[k - 1] - 1e-12) << "step " << k;
        EXPECT_NEAR(trace.back(), dual_objective(m, inst.x, inst.y), 1e-9);
    }
}

TEST(Solver, FeasiblePerturbationsDoNotImproveObjective)
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        auto inst = checks::random_instance(rng, 15, 3);
        const SvrHyperparams hp{inst.c, inst.gamma, inst.eps};
        const auto m = smo_train(inst.x, inst.y, hp, tight());
        const auto gram = rbf_gram(squared_distances(inst.x), inst.gamma);
        const auto beta = full_beta(m);
        const double best = dual_objective(gram, beta, inst.y, inst.eps);
        EXPECT_NEAR(best, dual_objective(m, inst.x, inst.y), 1e-12);
        for (int p = 0; p < 200; ++p) {
            auto b = beta;
            const std::size_t i = rng() % b.size(), j = rng() % b.size();
            if (i == j) continue;
            double delta = 1e-3 * inst.c * u(rng);
            delta = std::clamp(delta, std::max(-inst.c - b[i], b[j] - inst.c), std::min(inst.c - b[i], b[j] + inst.c));
            b[i] += delta;
            b[j] -= delta;
            EXPECT_LE(dual_objective(gram, b, inst.y, inst.eps), best + 1e-10);
        }
    }
}

TEST(Solver, ZeroCoefficientsGiveZeroObjective)
{
    const std::vector<FeatureVector> x{{0.0}, {1.0}, {2.0}};
    const auto gram = rbf_gram(squared_distances(x), 1.0);
    EXPECT_EQ(dual_objective(gram, std::vector<double>(3, 0.0), std::vector<double>{1.0, 2.0, 3.0}, 0.1), 0.0);
}

TEST(Solver, OnDemandKernelAgreesWithDenseKernel)
{
    std::mt19937_64 rng(11);
    auto inst = checks::random_instance(rng, 50, 4);
    const SvrHyperparams hp{inst.c, inst.gamma, inst.eps};
    const auto gram = rbf_gram(squared_distances(inst.x), inst.gamma);
    DenseKernel dense(gram);
    OnDemandKernel lazy(inst.x, inst.gamma);
    const auto a = solve_dual(dense, inst.y, hp, tight(1e-9));
    const auto b = solve_dual(lazy, inst.y, hp, tight(1e-9));
    EXPECT_EQ(a.iterations, b.iterations);
    for (std::size_t i = 0; i < a.beta.size(); ++i) EXPECT_NEAR(a.beta[i], b.beta[i], 1e-12);
    EXPECT_NEAR(a.bias, b.bias, 1e-12);
}

TEST(Solver, Errors)
{
    const std::vector<FeatureVector> x{{0.0}, {1.0}};
    auto code = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoError;
    };
    EXPECT_EQ(code([&] { smo_train(x, std::vector<double>{1.0}, SvrHyperparams{}); }), Errc::DimensionMismatch);
    EXPECT_EQ(code([&] { smo_train({}, std::vector<double>{}, SvrHyperparams{}); }), Errc::EmptyTrainingSet);
    EXPECT_EQ(code([&] { smo_train(x, std::vector<double>{1.0, std::nan("")}, SvrHyperparams{}); }), Errc::NonFiniteInput);
    EXPECT_EQ(code([&] { smo_train({{0.0}, {std::nan("")}}, std::vector<double>{1.0, 2.0}, SvrHyperparams{}); }),
              Errc::NonFiniteInput);
    EXPECT_EQ(code([&] { smo_train(x, std::vector<double>{1.0, 2.0}, SvrHyperparams{0.0, 1.0, 0.01}); }),
              Errc::NonPositiveParam);
    SolverOptions one;
    one.max_iterations = 1;
    std::mt19937_64 rng(12);
    auto inst = checks::random_instance(rng, 30, 3);
    inst.c = 100.0;
    EXPECT_EQ(code([&] { smo_train(inst.x, inst.y, SvrHyperparams{inst.c, inst.gamma, inst.eps}, one); }),
              Errc::NoConvergence);
}

// --- prediction -----------------------------------------------------------

TEST(Predict, ConstantModel)
{
    SvrModel m;
    m.bias = 0.5;
    m.scaling.target_scale = 10000.0;
    DaySample s;
    s.volumes.fill(123.0);
    EXPECT_DOUBLE_EQ(predict(m, s), 5000.0);
    s.weekday = 6;
    s.month = 12;
    EXPECT_DOUBLE_EQ(predict(m, s), 5000.0);
}

TEST(Predict, ClampsAtZero)
{
    SvrModel m;
    m.bias = -0.2;
    m.scaling.target_scale = 10000.0;
    EXPECT_EQ(predict(m, DaySample{}), 0.0);
}

TEST(Predict, TrainModelRecoversAConstantTarget)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    std::vector<DaySample> samples(40);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (auto& v : samples[i].volumes) v = u(rng);
        samples[i].weekday = static_cast<int>(i % 7);
        samples[i].month = 1 + static_cast<unsigned>(i % 12);
    }
    const std::vector<double> targets(samples.size(), 12345.0);
    const auto m = train_model(samples, targets, SvrHyperparams{1.0, 0.5, 0.01});
    EXPECT_TRUE(m.support_vectors.empty());
    for (const auto& s : samples) EXPECT_NEAR(predict(m, s), 12345.0, 12345.0 * 0.01);
}
