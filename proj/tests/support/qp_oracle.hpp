#pragma once

// Independent reference solver for the epsilon-SVR dual, used only by tests.
//
// Works on the split form with 2n variables z = [alpha; alpha*]:
//   minimize 1/2 z'Qz + p'z,  Q = [K -K; -K K],  p = [eps - y; eps + y]
//   subject to sum(alpha) - sum(alpha*) = 0,  0 <= z <= C
// with a dense primal-dual interior-point method (Eigen LU for the Newton
// systems). Shares no code with the library solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct QpSolution {
    std::vector<double> beta; // alpha - alpha*
    double objective = 0.0;   // dual objective (maximization form)
    double bias = 0.0;
    int iterations = 0;
};

inline double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::exp(-gamma * s);
}

inline Eigen::MatrixXd gram(const std::vector<std::vector<double>>& x, double gamma)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = rbf(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], gamma);
    return k;
}

inline double dual_value(const Eigen::MatrixXd& k, const Eigen::VectorXd& beta, const Eigen::VectorXd& y, double eps)
{
    return -0.5 * beta.dot(k * beta) + y.dot(beta) - eps * beta.cwiseAbs().sum();
}

inline QpSolution solve_svr_dual(const std::vector<std::vector<double>>& x, const std::vector<double>& y_in, double c,
                                 double gamma, double eps)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index m = 2 * n;
    const Eigen::MatrixXd k = gram(x, gamma);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = y_in[static_cast<std::size_t>(i)];

    Eigen::MatrixXd q(m, m);
    q << k, -k, -k, k;
    Eigen::VectorXd p(m);
    p << (eps - y.array()).matrix(), (eps + y.array()).matrix();
    Eigen::VectorXd a(m);
    a << Eigen::VectorXd::Ones(n), -Eigen::VectorXd::Ones(n);

    Eigen::VectorXd z = Eigen::VectorXd::Constant(m, 0.5 * c);
    Eigen::VectorXd lam = Eigen::VectorXd::Constant(m, 1.0);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(m, 1.0);
    double nu = 0.0;

    QpSolution out;
    for (int it = 0; it < 500; ++it) {
        const Eigen::VectorXd upper = (c - z.array()).matrix();
        const double gap = (lam.array() * z.array()).sum() + (mu.array() * upper.array()).sum();
        const Eigen::VectorXd rd = q * z + p - lam + mu + nu * a;
        const double rp = a.dot(z);
        out.iterations = it;
        if (gap < 1e-15 * static_cast<double>(m) && rd.norm() < 1e-13 && std::abs(rp) < 1e-14) break;

        const double tau = 0.1 * gap / static_cast<double>(2 * m);
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m + 1, m + 1);
        lhs.topLeftCorner(m, m) = q;
        lhs.diagonal().head(m).array() += lam.array() / z.array() + mu.array() / upper.array();
        lhs.block(0, m, m, 1) = a;
        lhs.block(m, 0, 1, m) = a.transpose();
        Eigen::VectorXd rhs(m + 1);
        rhs.head(m) = -(q * z + p - (tau / z.array()).matrix() + (tau / upper.array()).matrix() + nu * a);
        rhs(m) = -rp;
        const Eigen::VectorXd step = lhs.fullPivLu().solve(rhs);
        const Eigen::VectorXd dz = step.head(m);
        const Eigen::VectorXd dlam = ((tau - lam.array() * z.array() - lam.array() * dz.array()) / z.array()).matrix();
        const Eigen::VectorXd dmu = ((tau - mu.array() * upper.array() + mu.array() * dz.array()) / upper.array()).matrix();

        double alpha = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (dz(i) < 0) alpha = std::min(alpha, -0.995 * z(i) / dz(i));
            if (dz(i) > 0) alpha = std::min(alpha, 0.995 * upper(i) / dz(i));
            if (dlam(i) < 0) alpha = std::min(alpha, -0.995 * lam(i) / dlam(i));
            if (dmu(i) < 0) alpha = std::min(alpha, -0.995 * mu(i) / dmu(i));
        }
        z += alpha * dz;
        lam += alpha * dlam;
        mu += alpha * dmu;
        nu += alpha * step(m);
    }

    Eigen::VectorXd beta = z.head(n) - z.tail(n);
    out.beta.assign(beta.data(), beta.data() + n);
    out.objective = dual_value(k, beta, y, eps);

    // Bias from the optimality conditions on the recovered coefficients:
    // average over free coefficients, else the midpoint of the feasible interval.
    const Eigen::VectorXd r = y - k * beta;
    const double thr = 1e-7 * c;
    double sum = 0.0;
    int free = 0;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double b = beta(i);
        if (std::abs(b) > thr && std::abs(b) < c - thr) {
            sum += r(i) - (b > 0 ? eps : -eps);
            ++free;
        } else if (std::abs(b) <= thr) {
            lo = std::max(lo, r(i) - eps);
            hi = std::min(hi, r(i) + eps);
        } else if (b > 0) {
            hi = std::min(hi, r(i) - eps);
        } else {
            lo = std::max(lo, r(i) + eps);
        }
    }
    out.bias = free > 0 ? sum / free : 0.5 * (lo + hi);
    return out;
}

inline double predict(const QpSolution& s, const std::vector<std::vector<double>>& x, double gamma,
                      const std::vector<double>& query)
{
    double v = s.bias;
    for (std::size_t i = 0; i < x.size(); ++i) v += s.beta[i] * rbf(x[i], query, gamma);
    return v;
}

} // namespace oracle
