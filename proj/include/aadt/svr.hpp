#pragma once

// epsilon-support vector regression with an RBF kernel.
//
// The dual is solved over the signed coefficients beta_i = alpha_i - alpha_i*:
//
//   minimize   f(beta) = 1/2 beta' K beta - y' beta + eps * |beta|_1
//   subject to sum(beta) = 0,  -C <= beta_i <= C
//
// (the usual dual objective is -f). Each step picks a KKT-violating pair
// (i up, j down) with second-order working-set selection and moves it by the
// exact minimizer of the piecewise-quadratic 1-D restriction, so -f never
// decreases.

#include "aadt/domain.hpp"
#include "aadt/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace aadt::svr {

inline constexpr double kDefaultEpsilon = 0.01;
inline constexpr std::size_t kWeekdays = 7;
inline constexpr std::size_t kMonths = 12;
inline constexpr std::size_t kFeatureDim = kHoursPerDay + kWeekdays + kMonths; // 43
inline constexpr std::size_t kFullCacheLimit = 4096;

using FeatureVector = std::vector<double>;

struct SvrHyperparams {
    double c = 1.0;
    double gamma = 1.0;
    double epsilon = kDefaultEpsilon;

    void validate() const
    {
        if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::NonPositiveParam, "C must be > 0");
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(Errc::NonPositiveParam, "gamma must be > 0");
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error(Errc::NonPositiveParam, "epsilon must be >= 0");
    }

    friend bool operator==(const SvrHyperparams&, const SvrHyperparams&) = default;
};

/// One day of raw input: 24 hourly volumes plus its calendar position.
struct DaySample {
    std::array<double, kHoursPerDay> volumes{};
    int weekday = 0;    // 0 = Monday
    unsigned month = 1; // 1..12

    friend bool operator==(const DaySample&, const DaySample&) = default;
};

inline DaySample to_sample(const DailyCount& day)
{
    DaySample s;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) s.volumes[h] = static_cast<double>(day.volumes[h]);
    s.weekday = day_of_week(day.date);
    s.month = month_of(day.date);
    return s;
}

inline DaySample to_sample(const ShortTermRecord& rec)
{
    return DaySample{rec.volumes, day_of_week(rec.date), month_of(rec.date)};
}

// ---------------------------------------------------------------------------
// Kernel

inline double squared_distance(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw Error(Errc::DimensionMismatch,
                    "vectors of length " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma)
{
    return std::exp(-gamma * squared_distance(x, y));
}

/// Dense symmetric n x n matrix, row-major.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Pairwise squared distances; the kernel for any gamma is exp(-gamma * D).
inline SymmetricMatrix squared_distances(const std::vector<FeatureVector>& x)
{
    SymmetricMatrix d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) d(i, j) = d(j, i) = squared_distance(x[i], x[j]);
    return d;
}

inline SymmetricMatrix rbf_gram(const SymmetricMatrix& dist, double gamma)
{
    SymmetricMatrix k(dist.size());
    auto src = dist.values();
    auto dst = k.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(-gamma * src[i]);
    return k;
}

/// Kernel rows served from a precomputed Gram matrix.
class DenseKernel {
public:
    explicit DenseKernel(const SymmetricMatrix& gram) : gram_(&gram) {}
    std::size_t size() const noexcept { return gram_->size(); }
    std::span<const double> row(std::size_t i, int /*slot*/) { return gram_->row(i); }
    double diag(std::size_t i) const noexcept { return (*gram_)(i, i); }

private:
    const SymmetricMatrix* gram_;
};

/// Kernel rows recomputed on every request (no cache) for large training sets.
class OnDemandKernel {
public:
    OnDemandKernel(const std::vector<FeatureVector>& x, double gamma)
        : x_(&x), gamma_(gamma), buffers_{std::vector<double>(x.size()), std::vector<double>(x.size())}
    {}
    std::size_t size() const noexcept { return x_->size(); }
    std::span<const double> row(std::size_t i, int slot)
    {
        auto& buf = buffers_[static_cast<std::size_t>(slot)];
        for (std::size_t j = 0; j < x_->size(); ++j) buf[j] = rbf_kernel((*x_)[i], (*x_)[j], gamma_);
        return buf;
    }
    double diag(std::size_t) const noexcept { return 1.0; }

private:
    const std::vector<FeatureVector>* x_;
    double gamma_;
    std::array<std::vector<double>, 2> buffers_;
};

// ---------------------------------------------------------------------------
// Dual solver

struct SolverOptions {
    double tol = 1e-3;
    std::uint64_t max_iterations = 10'000'000;
    /// Called after every pair update with (iteration, dual objective).
    std::function<void(std::uint64_t, double)> on_iteration;
};

struct DualSolution {
    std::vector<double> beta;
    double bias = 0.0;
    double max_violation = 0.0; // final KKT gap, clamped at 0
    std::uint64_t iterations = 0;
};

namespace detail {

inline constexpr double kTau = 1e-12;

inline double sign_up(double b) { return b >= 0.0 ? 1.0 : -1.0; }   // right derivative of |b|
inline double sign_down(double b) { return b > 0.0 ? 1.0 : -1.0; }  // left derivative of |b|

struct Violators {
    std::size_t up = 0, down = 0;
    double min_up = std::numeric_limits<double>::infinity();
    double max_down = -std::numeric_limits<double>::infinity();
};

inline Violators find_violators(std::span<const double> beta, std::span<const double> grad, double c, double eps)
{
    Violators v;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        if (beta[k] < c) {
            const double d = grad[k] + eps * sign_up(beta[k]);
            if (d < v.min_up) { v.min_up = d; v.up = k; }
        }
        if (beta[k] > -c) {
            const double d = grad[k] + eps * sign_down(beta[k]);
            if (d > v.max_down) { v.max_down = d; v.down = k; }
        }
    }
    return v;
}

/// Exact minimizer over t in [0, hi] of
///   1/2 a t^2 + dg t + eps (|bi + t| + |bj - t|).
inline double pair_step(double a, double dg, double eps, double bi, double bj, double hi)
{
    std::array<double, 4> pts{0.0, hi, 0.0, 0.0};
    std::size_t np = 2;
    if (-bi > 0.0 && -bi < hi) pts[np++] = -bi;
    if (bj > 0.0 && bj < hi) pts[np++] = bj;
    std::sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(np));

    auto phi = [&](double t) { return 0.5 * a * t * t + dg * t + eps * (std::abs(bi + t) + std::abs(bj - t)); };

    double best_t = 0.0;
    double best_phi = phi(0.0);
    for (std::size_t s = 0; s + 1 < np; ++s) {
        const double lo = pts[s], up = pts[s + 1];
        if (up <= lo) continue;
        const double mid = 0.5 * (lo + up);
        const double si = (bi + mid) >= 0.0 ? 1.0 : -1.0;
        const double sj = (bj - mid) >= 0.0 ? 1.0 : -1.0;
        const double lin = dg + eps * (si - sj);
        double t;
        if (a > 0.0) t = std::clamp(-lin / a, lo, up);
        else t = lin < 0.0 ? up : lo;
        const double p = phi(t);
        if (p < best_phi) { best_phi = p; best_t = t; }
    }
    return best_t;
}

inline double primal_part(std::span<const double> beta, std::span<const double> grad, std::span<const double> y,
                          double eps)
{
    // f = 1/2 beta'(K beta) - y'beta + eps|beta|_1 with K beta = grad + y
    double f = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k)
        f += 0.5 * beta[k] * (grad[k] + y[k]) - y[k] * beta[k] + eps * std::abs(beta[k]);
    return f;
}

} // namespace detail

template <class Kernel>
DualSolution solve_dual(Kernel& kernel, std::span<const double> y, const SvrHyperparams& hp,
                        const SolverOptions& opt = {})
{
    hp.validate();
    const std::size_t n = kernel.size();
    if (y.size() != n)
        throw Error(Errc::DimensionMismatch, std::to_string(n) + " samples but " + std::to_string(y.size()) + " targets");
    if (n == 0) throw Error(Errc::EmptyTrainingSet, "no training samples");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "non-finite target");
    if (!(opt.tol > 0.0)) throw Error(Errc::BadConfig, "solver tolerance must be > 0");

    const double c = hp.c, eps = hp.epsilon;
    DualSolution sol;
    sol.beta.assign(n, 0.0);
    std::vector<double> grad(y.begin(), y.end());
    for (double& g : grad) g = -g;

    auto& beta = sol.beta;
    detail::Violators v;
    while (true) {
        v = detail::find_violators(beta, grad, c, eps);
        if (v.max_down - v.min_up <= opt.tol) break;
        if (sol.iterations >= opt.max_iterations)
            throw Error(Errc::NoConvergence, "no convergence after " + std::to_string(opt.max_iterations) +
                                                 " pair updates (KKT gap " + std::to_string(v.max_down - v.min_up) + ")");

        // i: most violating "up" index. j: among violating "down" indices, the one
        // with the largest guaranteed decrease (gap^2 / curvature) for the pair.
        const std::size_t i = v.up;
        auto ki = kernel.row(i, 0);
        const double kii = kernel.diag(i);
        std::size_t j = v.down;
        double best_score = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!(beta[k] > -c)) continue;
            const double gap = grad[k] + eps * detail::sign_down(beta[k]) - v.min_up;
            if (gap <= 0.0) continue;
            double a = kii + kernel.diag(k) - 2.0 * ki[k];
            if (a <= 0.0) a = detail::kTau;
            const double score = gap * gap / a;
            if (score > best_score) { best_score = score; j = k; }
        }
        auto kj = kernel.row(j, 1);
        const double a = std::max(0.0, kii + kernel.diag(j) - 2.0 * ki[j]);
        const double hi = std::min(c - beta[i], beta[j] + c);
        const double t = detail::pair_step(a, grad[i] - grad[j], eps, beta[i], beta[j], hi);
        if (!(t > 0.0)) {
            // Round-off left no representable progress on the chosen pair.
            break;
        }

        const double old_i = beta[i], old_j = beta[j];
        beta[i] = (t == hi && c - old_i == hi) ? c : (t == -old_i ? 0.0 : old_i + t);
        beta[j] = (t == hi && old_j + c == hi) ? -c : (t == old_j ? 0.0 : old_j - t);
        const double di = beta[i] - old_i, dj = beta[j] - old_j;
        for (std::size_t k = 0; k < n; ++k) grad[k] += di * ki[k] + dj * kj[k];

        ++sol.iterations;
        if (opt.on_iteration) opt.on_iteration(sol.iterations, -detail::primal_part(beta, grad, y, eps));
    }

    sol.max_violation = std::max(0.0, v.max_down - v.min_up);

    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double b = std::abs(beta[k]);
        if (b > 0.0 && b < c) {
            sum_free += grad[k] + eps * (beta[k] > 0.0 ? 1.0 : -1.0);
            ++n_free;
        }
    }
    if (n_free > 0) sol.bias = -sum_free / static_cast<double>(n_free);
    else sol.bias = -0.5 * (v.min_up + v.max_down);
    return sol;
}

/// Dual objective -f(beta) for an arbitrary coefficient vector.
inline double dual_objective(const SymmetricMatrix& gram, std::span<const double> beta, std::span<const double> y,
                             double epsilon)
{
    const std::size_t n = gram.size();
    if (beta.size() != n || y.size() != n) throw Error(Errc::DimensionMismatch, "dual objective operands");
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (beta[i] == 0.0) continue;
        auto row = gram.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * beta[j];
        quad += beta[i] * s;
        lin += y[i] * beta[i] - epsilon * std::abs(beta[i]);
    }
    return -0.5 * quad + lin;
}

// ---------------------------------------------------------------------------
// Scaling and features

struct ScalingParams {
    std::array<double, kHoursPerDay> min{};
    std::array<double, kHoursPerDay> max{};
    double target_scale = 1.0;

    double scale_volume(std::size_t h, double v) const
    {
        const double range = max[h] - min[h];
        return range > 0.0 ? (v - min[h]) / range : 0.0;
    }
    double scale_target(double aadt) const { return aadt / target_scale; }
    double unscale_target(double scaled) const { return scaled * target_scale; }

    friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

inline ScalingParams fit_scaling(std::span<const DaySample> samples, std::span<const double> targets)
{
    if (samples.empty()) throw Error(Errc::EmptyTrainingSet, "cannot fit scaling without samples");
    if (samples.size() != targets.size())
        throw Error(Errc::DimensionMismatch, std::to_string(samples.size()) + " samples but " +
                                                 std::to_string(targets.size()) + " targets");
    ScalingParams p;
    p.min.fill(std::numeric_limits<double>::infinity());
    p.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& s : samples)
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            if (!std::isfinite(s.volumes[h])) throw Error(Errc::NonFiniteInput, "non-finite hourly volume");
            p.min[h] = std::min(p.min[h], s.volumes[h]);
            p.max[h] = std::max(p.max[h], s.volumes[h]);
        }
    double tmax = -std::numeric_limits<double>::infinity();
    for (double t : targets) {
        if (!std::isfinite(t)) throw Error(Errc::NonFiniteInput, "non-finite target");
        tmax = std::max(tmax, t);
    }
    if (!(tmax > 0.0)) throw Error(Errc::NonFiniteInput, "largest training target must be positive");
    p.target_scale = tmax;
    return p;
}

/// 24 min-max scaled volumes, one-hot weekday, one-hot month.
inline FeatureVector make_features(const DaySample& s, const ScalingParams& scaling)
{
    if (s.weekday < 0 || s.weekday > 6 || s.month < 1 || s.month > 12)
        throw Error(Errc::DimensionMismatch, "weekday/month out of range");
    FeatureVector f(kFeatureDim, 0.0);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) f[h] = scaling.scale_volume(h, s.volumes[h]);
    f[kHoursPerDay + static_cast<std::size_t>(s.weekday)] = 1.0;
    f[kHoursPerDay + kWeekdays + (s.month - 1)] = 1.0;
    return f;
}

inline std::vector<FeatureVector> make_features(std::span<const DaySample> samples, const ScalingParams& scaling)
{
    std::vector<FeatureVector> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(make_features(s, scaling));
    return out;
}

// ---------------------------------------------------------------------------
// Model

struct SvrModel {
    SvrHyperparams hyperparams;
    std::vector<FeatureVector> support_vectors;
    std::vector<double> coefficients;        // beta_i for each support vector
    std::vector<std::size_t> support_indices; // positions in the training set
    double bias = 0.0;
    ScalingParams scaling;
    std::size_t training_size = 0;
    std::uint64_t iterations = 0;
    double max_violation = 0.0;

    /// Decision value in scaled-target units (no clamping).
    double decision(std::span<const double> features) const
    {
        double s = bias;
        for (std::size_t k = 0; k < support_vectors.size(); ++k)
            s += coefficients[k] * rbf_kernel(support_vectors[k], features, hyperparams.gamma);
        return s;
    }
};

inline void check_features(const std::vector<FeatureVector>& x)
{
    for (const auto& row : x) {
        if (row.size() != x.front().size()) throw Error(Errc::DimensionMismatch, "ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "non-finite feature value");
    }
}

inline SvrModel model_from_solution(const std::vector<FeatureVector>& x, const SvrHyperparams& hp,
                                    const DualSolution& sol)
{
    SvrModel m;
    m.hyperparams = hp;
    m.bias = sol.bias;
    m.training_size = x.size();
    m.iterations = sol.iterations;
    m.max_violation = sol.max_violation;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sol.beta[i] == 0.0) continue;
        m.support_vectors.push_back(x[i]);
        m.coefficients.push_back(sol.beta[i]);
        m.support_indices.push_back(i);
    }
    return m;
}

/// Trains on already-built features and scaled targets. The returned model has
/// identity scaling; train_model attaches real scaling parameters.
inline SvrModel smo_train(const std::vector<FeatureVector>& x, std::span<const double> y, const SvrHyperparams& hp,
                          const SolverOptions& opt = {})
{
    if (x.size() != y.size())
        throw Error(Errc::DimensionMismatch, std::to_string(x.size()) + " samples but " + std::to_string(y.size()) + " targets");
    if (x.empty()) throw Error(Errc::EmptyTrainingSet, "no training samples");
    check_features(x);

    DualSolution sol;
    if (x.size() <= kFullCacheLimit) {
        SymmetricMatrix gram = rbf_gram(squared_distances(x), hp.gamma);
        DenseKernel k(gram);
        sol = solve_dual(k, y, hp, opt);
    } else {
        OnDemandKernel k(x, hp.gamma);
        sol = solve_dual(k, y, hp, opt);
    }
    return model_from_solution(x, hp, sol);
}

/// Dual objective of a trained model on its own training set.
inline double dual_objective(const SvrModel& model, const std::vector<FeatureVector>& x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() != model.training_size)
        throw Error(Errc::DimensionMismatch, "model was trained on " + std::to_string(model.training_size) + " samples");
    double quad = 0.0, lin = 0.0;
    for (std::size_t a = 0; a < model.support_indices.size(); ++a) {
        const std::size_t i = model.support_indices[a];
        if (x[i].size() != model.support_vectors[a].size()) throw Error(Errc::DimensionMismatch, "feature dimension");
        for (std::size_t b = 0; b < model.support_indices.size(); ++b)
            quad += model.coefficients[a] * model.coefficients[b] *
                    rbf_kernel(x[i], x[model.support_indices[b]], model.hyperparams.gamma);
        lin += y[i] * model.coefficients[a] - model.hyperparams.epsilon * std::abs(model.coefficients[a]);
    }
    return -0.5 * quad + lin;
}

/// Fits scaling on the raw samples, then trains on scaled features/targets.
inline SvrModel train_model(std::span<const DaySample> samples, std::span<const double> targets,
                            const SvrHyperparams& hp, const SolverOptions& opt = {})
{
    ScalingParams scaling = fit_scaling(samples, targets);
    std::vector<double> y(targets.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = scaling.scale_target(targets[i]);
    SvrModel m = smo_train(make_features(samples, scaling), y, hp, opt);
    m.scaling = scaling;
    return m;
}

/// Clamped prediction in scaled-target units.
inline double predict_scaled(const SvrModel& model, const DaySample& sample)
{
    return std::max(0.0, model.decision(make_features(sample, model.scaling)));
}

/// AADT estimate in vehicles/day, never negative.
inline double predict(const SvrModel& model, const DaySample& sample)
{
    return model.scaling.unscale_target(predict_scaled(model, sample));
}

} // namespace aadt::svr
