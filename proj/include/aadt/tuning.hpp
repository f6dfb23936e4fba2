#pragma once

// k-fold cross-validation and power-of-two grid search over (C, gamma).

#include "aadt/error.hpp"
#include "aadt/svr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

namespace aadt::tuning {

/// SplitMix64 (Steele, Lea & Flood). Small, seedable, and identical on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection, bound > 0.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do r = next();
        while (r >= limit);
        return r % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

using Folds = std::vector<std::vector<std::size_t>>;

/// Fisher-Yates shuffle of 0..n-1 driven by SplitMix64(seed), then cut into k
/// contiguous chunks; the first n % k folds get one extra index. Indices within
/// each fold are sorted.
inline Folds kfold_split(std::size_t n, std::size_t k, std::uint64_t seed)
{
    if (k < 2 || k > n)
        throw Error(Errc::TooFewSamples, "k-fold split needs 2 <= k <= n (k=" + std::to_string(k) +
                                             ", n=" + std::to_string(n) + ")");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    Folds folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                        perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

/// Training-split indices for fold f (every index not in folds[f]), sorted.
inline std::vector<std::size_t> training_indices(const Folds& folds, std::size_t f, std::size_t n)
{
    std::vector<char> held(n, 0);
    for (std::size_t i : folds[f]) held.at(i) = 1;
    std::vector<std::size_t> out;
    out.reserve(n - folds[f].size());
    for (std::size_t i = 0; i < n; ++i)
        if (!held[i]) out.push_back(i);
    return out;
}

inline void check_folds(const Folds& folds, std::size_t n)
{
    std::vector<char> seen(n, 0);
    std::size_t count = 0;
    for (const auto& fold : folds)
        for (std::size_t i : fold) {
            if (i >= n || seen[i]) throw Error(Errc::BadConfig, "folds do not partition the samples");
            seen[i] = 1;
            ++count;
        }
    if (count != n || folds.size() < 2) throw Error(Errc::BadConfig, "folds do not partition the samples");
    for (const auto& fold : folds)
        if (fold.empty() || fold.size() == n) throw Error(Errc::TooFewSamples, "every fold needs held-out and training samples");
}

/// Scaled features for one fold; scaling is fit on the training split only.
struct FoldData {
    svr::ScalingParams scaling;
    std::vector<svr::FeatureVector> train_x;
    std::vector<double> train_y;
    std::vector<svr::FeatureVector> test_x;
    std::vector<double> test_y;
};

inline FoldData prepare_fold(std::span<const svr::DaySample> samples, std::span<const double> targets,
                             const Folds& folds, std::size_t f)
{
    const auto train = training_indices(folds, f, samples.size());
    std::vector<svr::DaySample> train_samples;
    std::vector<double> train_targets;
    for (std::size_t i : train) {
        train_samples.push_back(samples[i]);
        train_targets.push_back(targets[i]);
    }
    FoldData d;
    d.scaling = svr::fit_scaling(train_samples, train_targets);
    d.train_x = svr::make_features(train_samples, d.scaling);
    for (double t : train_targets) d.train_y.push_back(d.scaling.scale_target(t));
    for (std::size_t i : folds[f]) {
        d.test_x.push_back(svr::make_features(samples[i], d.scaling));
        d.test_y.push_back(d.scaling.scale_target(targets[i]));
    }
    return d;
}

inline double held_out_mse(const svr::SvrModel& model, const FoldData& fold)
{
    double sse = 0.0;
    for (std::size_t i = 0; i < fold.test_x.size(); ++i) {
        const double pred = std::max(0.0, model.decision(fold.test_x[i]));
        const double e = pred - fold.test_y[i];
        sse += e * e;
    }
    return sse / static_cast<double>(fold.test_x.size());
}

/// Mean over folds of the held-out MSE in scaled-target units. Predictions are
/// clamped at zero as in deployment.
inline double cv_mse(std::span<const svr::DaySample> samples, std::span<const double> targets,
                     const svr::SvrHyperparams& hp, const Folds& folds, const svr::SolverOptions& opt = {})
{
    if (samples.size() != targets.size()) throw Error(Errc::DimensionMismatch, "samples vs targets");
    check_folds(folds, samples.size());
    double total = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        FoldData fold = prepare_fold(samples, targets, folds, f);
        svr::SvrModel m = svr::smo_train(fold.train_x, fold.train_y, hp, opt);
        total += held_out_mse(m, fold);
    }
    return total / static_cast<double>(folds.size());
}

struct ExponentRange {
    int first = 0;
    int last = 0;
};

struct GridSpec {
    ExponentRange c_exponents{-3, 15};
    ExponentRange gamma_exponents{-15, 3};
    int step = 1;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double epsilon = svr::kDefaultEpsilon;
    double tol = 1e-3;
    /// Pair-update budget per fit. A cell whose fit exceeds it on any fold is
    /// reported as not converged (mse = +inf) and never selected.
    std::uint64_t max_iterations = 10'000'000;
    /// Worker threads for grid cells; 0 = hardware concurrency.
    std::size_t threads = 1;

    static std::vector<int> exponents(ExponentRange r, int step)
    {
        std::vector<int> out;
        for (int e = r.first; e <= r.last; e += step) out.push_back(e);
        return out;
    }
    std::vector<int> c_values() const { return exponents(c_exponents, step); }
    std::vector<int> gamma_values() const { return exponents(gamma_exponents, step); }

    void validate() const
    {
        if (step < 1) throw Error(Errc::BadConfig, "grid step must be >= 1");
        if (c_exponents.first > c_exponents.last || gamma_exponents.first > gamma_exponents.last)
            throw Error(Errc::BadConfig, "grid exponent ranges must be non-empty");
        if (folds < 2) throw Error(Errc::BadConfig, "need at least 2 folds");
    }
};

struct GridCell {
    double c = 0.0;
    double gamma = 0.0;
    double mse = 0.0;
    bool converged = true;
};

struct CvResult {
    std::vector<GridCell> cells; // C-major: all gammas for the first C, then the next C, ...
    GridCell best;
};

/// Called with (cells_done, cells_total); values never decrease.
using GridProgress = std::function<void(std::size_t, std::size_t)>;

/// Minimum MSE among converged cells; ties go to the smaller C, then the smaller gamma.
inline GridCell select_best(std::span<const GridCell> cells)
{
    const GridCell* best = nullptr;
    for (const auto& cell : cells) {
        if (!cell.converged) continue;
        if (!best || cell.mse < best->mse ||
            (cell.mse == best->mse && (cell.c < best->c || (cell.c == best->c && cell.gamma < best->gamma))))
            best = &cell;
    }
    if (!best) throw Error(cells.empty() ? Errc::EmptyInput : Errc::NoConvergence, "no converged grid cell");
    return *best;
}

/// Evaluates cv_mse at every (2^i, 2^j) of the grid. Each fold's feature
/// geometry is computed once and shared by all cells; cells are distributed
/// across threads by gamma, and the result depends only on the grid index.
inline CvResult grid_search(std::span<const svr::DaySample> samples, std::span<const double> targets,
                            const GridSpec& spec, const GridProgress& progress = {})
{
    spec.validate();
    if (samples.size() != targets.size()) throw Error(Errc::DimensionMismatch, "samples vs targets");
    const Folds folds = kfold_split(samples.size(), spec.folds, spec.seed);

    const auto cs = spec.c_values();
    const auto gammas = spec.gamma_values();
    const std::size_t total = cs.size() * gammas.size();

    struct FoldGeometry {
        FoldData data;
        svr::SymmetricMatrix train_dist;
        std::vector<std::vector<double>> cross_dist; // test x train
    };
    std::vector<FoldGeometry> geo;
    geo.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        FoldGeometry g{prepare_fold(samples, targets, folds, f), {}, {}};
        g.train_dist = svr::squared_distances(g.data.train_x);
        for (const auto& t : g.data.test_x) {
            std::vector<double> row(g.data.train_x.size());
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = svr::squared_distance(g.data.train_x[j], t);
            g.cross_dist.push_back(std::move(row));
        }
        geo.push_back(std::move(g));
    }

    std::vector<double> mse(total, 0.0);
    std::vector<char> converged(total, 1);
    std::atomic<std::size_t> next_gamma{0};
    std::mutex progress_mutex;
    std::size_t done = 0;
    std::exception_ptr failure;

    svr::SolverOptions opt;
    opt.tol = spec.tol;
    opt.max_iterations = spec.max_iterations;

    auto worker = [&] {
        for (std::size_t gi = next_gamma++; gi < gammas.size(); gi = next_gamma++) {
            try {
                const double gamma = std::ldexp(1.0, gammas[gi]);
                std::vector<double> fold_sum(cs.size(), 0.0);
                std::vector<char> ok(cs.size(), 1);
                for (const auto& g : geo) {
                    const svr::SymmetricMatrix gram = svr::rbf_gram(g.train_dist, gamma);
                    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
                        if (!ok[ci]) continue;
                        svr::SvrHyperparams hp{std::ldexp(1.0, cs[ci]), gamma, spec.epsilon};
                        svr::DenseKernel k(gram);
                        svr::DualSolution sol;
                        try {
                            sol = svr::solve_dual(k, g.data.train_y, hp, opt);
                        } catch (const Error& e) {
                            if (e.code() != Errc::NoConvergence) throw;
                            ok[ci] = 0;
                            continue;
                        }
                        double sse = 0.0;
                        for (std::size_t t = 0; t < g.cross_dist.size(); ++t) {
                            double s = sol.bias;
                            for (std::size_t j = 0; j < sol.beta.size(); ++j)
                                if (sol.beta[j] != 0.0) s += sol.beta[j] * std::exp(-gamma * g.cross_dist[t][j]);
                            const double e = std::max(0.0, s) - g.data.test_y[t];
                            sse += e * e;
                        }
                        fold_sum[ci] += sse / static_cast<double>(g.cross_dist.size());
                    }
                }
                for (std::size_t ci = 0; ci < cs.size(); ++ci) {
                    const std::size_t cell = ci * gammas.size() + gi;
                    converged[cell] = ok[ci];
                    mse[cell] = ok[ci] ? fold_sum[ci] / static_cast<double>(geo.size())
                                       : std::numeric_limits<double>::infinity();
                }
            } catch (...) {
                std::lock_guard lock(progress_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                done += cs.size();
                progress(done, total);
            }
        }
    };

    std::size_t n_threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
    n_threads = std::min(n_threads, gammas.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);

    CvResult result;
    result.cells.reserve(total);
    for (std::size_t ci = 0; ci < cs.size(); ++ci)
        for (std::size_t gi = 0; gi < gammas.size(); ++gi)
            result.cells.push_back({std::ldexp(1.0, cs[ci]), std::ldexp(1.0, gammas[gi]), mse[ci * gammas.size() + gi],
                                    converged[ci * gammas.size() + gi] != 0});
    result.best = select_best(result.cells);
    return result;
}

} // namespace aadt::tuning
