#pragma once
#include <limits>
#include <random>
#include <sstream>
#include <groupsparse/core.hpp>

namespace groupsparse {

/**
 * l(beta) = 1/2 beta^T A beta + b^T beta + c.
 *
 * A must be symmetric. When strict convexity is declared, A must also be
 * positive definite; the constructor checks both.
 */
class QuadraticObjective : public Objective
{
public:
    QuadraticObjective(mat_t A, vec_t b, double c, bool strictly_convex = true)
        : A_(std::move(A)), b_(std::move(b)), c_(c), strict_(strictly_convex)
    {
        if (A_.rows() != A_.cols() || A_.rows() != b_.size()) {
            throw ContractError("quadratic: A must be n x n and b length n");
        }
        const double scale = 1.0 + A_.cwiseAbs().maxCoeff();
        if (A_.size() > 0 && (A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw ContractError("quadratic: A is not symmetric");
        }
        if (strict_ && A_.size() > 0) {
            Eigen::SelfAdjointEigenSolver<mat_t> es(A_, Eigen::EigenvaluesOnly);
            if (!(es.eigenvalues()(0) > 0)) {
                throw ContractError("quadratic: A is not positive definite");
            }
        }
    }

    std::size_t dim() const override { return static_cast<std::size_t>(b_.size()); }
    bool strictly_convex() const override { return strict_; }

    double value(const vec_t& beta) const override
    {
        check_dim(beta, dim(), "quadratic value");
        return 0.5 * beta.dot(A_ * beta) + b_.dot(beta) + c_;
    }

    vec_t gradient(const vec_t& beta) const override
    {
        check_dim(beta, dim(), "quadratic gradient");
        return A_ * beta + b_;
    }

    double value_and_gradient(const vec_t& beta, vec_t& grad) const override
    {
        check_dim(beta, dim(), "quadratic value");
        vec_t Ab = A_ * beta;
        grad = Ab + b_;
        return 0.5 * beta.dot(Ab) + b_.dot(beta) + c_;
    }

    std::optional<vec_t> exact_restricted_minimizer(const std::vector<std::size_t>& coords) const override
    {
        vec_t beta = vec_t::Zero(b_.size());
        if (coords.empty()) return beta;
        const auto k = static_cast<index_t>(coords.size());
        mat_t sub(k, k);
        vec_t rhs(k);
        for (index_t a = 0; a < k; ++a) {
            rhs[a] = -b_[coords[a]];
            for (index_t c = 0; c < k; ++c) sub(a, c) = A_(coords[a], coords[c]);
        }
        Eigen::LDLT<mat_t> ldlt(sub);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
        vec_t x = ldlt.solve(rhs);
        // one step of iterative refinement keeps the stationarity residual at
        // machine precision for moderately conditioned blocks
        x += ldlt.solve(rhs - sub * x);
        for (index_t a = 0; a < k; ++a) beta[coords[a]] = x[a];
        return beta;
    }

    const mat_t& A() const { return A_; }
    const vec_t& b() const { return b_; }
    double c() const { return c_; }

private:
    mat_t A_;
    vec_t b_;
    double c_;
    bool strict_;
};

/// Ridge weight large enough to make X^T X + rho I comfortably nonsingular.
inline double default_ridge(const mat_t& X)
{
    if (X.cols() == 0) return 0;
    return 1e-6 * X.squaredNorm() / static_cast<double>(X.cols());
}

/**
 * ||X beta - y||^2 + rho ||beta||^2 as a quadratic:
 * A = 2 (X^T X + rho I), b = -2 X^T y, c = ||y||^2.
 * Strict convexity is declared iff A is positive definite.
 */
inline QuadraticObjective least_squares(const mat_t& X, const vec_t& y, double rho = 0)
{
    if (X.rows() != y.size()) throw ContractError("least_squares: X rows != length(y)");
    if (rho < 0) throw ContractError("least_squares: ridge must be >= 0");
    const index_t n = X.cols();
    mat_t A = 2.0 * (X.transpose() * X);
    A.diagonal().array() += 2.0 * rho;
    A = 0.5 * (A + A.transpose());
    vec_t b = -2.0 * (X.transpose() * y);
    bool pd = n > 0;
    if (pd) {
        Eigen::SelfAdjointEigenSolver<mat_t> es(A, Eigen::EigenvaluesOnly);
        pd = es.eigenvalues()(0) > 1e-14 * (1.0 + es.eigenvalues()(n - 1));
    }
    return QuadraticObjective(std::move(A), std::move(b), y.squaredNorm(), pd);
}

/// sum_i log(1 + exp(-y_i x_i^T beta)) + rho ||beta||^2, labels in {-1, +1}.
class RidgeLogisticObjective : public Objective
{
public:
    RidgeLogisticObjective(mat_t X, vec_t y, double rho)
        : X_(std::move(X)), y_(std::move(y)), rho_(rho)
    {
        if (X_.rows() != y_.size()) throw ContractError("logistic: X rows != length(y)");
        if (!(rho_ > 0)) throw ContractError("logistic: ridge weight must be > 0");
        for (index_t i = 0; i < y_.size(); ++i) {
            if (y_[i] != 1.0 && y_[i] != -1.0) throw ContractError("logistic: labels must be +-1");
        }
    }

    std::size_t dim() const override { return static_cast<std::size_t>(X_.cols()); }

    double value(const vec_t& beta) const override
    {
        vec_t g;
        return value_and_gradient(beta, g);
    }

    vec_t gradient(const vec_t& beta) const override
    {
        vec_t g;
        value_and_gradient(beta, g);
        return g;
    }

    double value_and_gradient(const vec_t& beta, vec_t& grad) const override
    {
        check_dim(beta, dim(), "logistic");
        const vec_t margin = y_.cwiseProduct(X_ * beta);
        double v = rho_ * beta.squaredNorm();
        vec_t w(margin.size());
        for (index_t i = 0; i < margin.size(); ++i) {
            const double z = -margin[i];
            // log(1 + e^z) and its derivative sigma(z), both overflow-safe
            v += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            w[i] = -y_[i] * sig;
        }
        grad = X_.transpose() * w + 2.0 * rho_ * beta;
        return v;
    }

    const mat_t& X() const { return X_; }
    const vec_t& y() const { return y_; }
    double rho() const { return rho_; }

private:
    mat_t X_;
    vec_t y_;
    double rho_;
};

/// Restricted strong convexity / smoothness constants at group sparsity s.
struct RscConstants
{
    std::size_t s = 0;
    double mu = 0;
    double L = 0;
    bool certified = false;
    std::size_t subsets_examined = 0;
};

struct RscOptions
{
    double enumeration_cap = 1e6;
    std::size_t samples = 2000;
    std::uint64_t seed = 0;
};

/**
 * For a quadratic the Hessian is A everywhere, so
 *   mu_s = min over unions U of s groups of lambda_min(A[U,U]),
 *   L_s  = max over the same unions of lambda_max(A[U,U]).
 * Unions of exactly min(s, t) groups suffice by eigenvalue interlacing.
 * Exhaustive (certified) when C(t, s) <= cap, otherwise a sampled estimate.
 */
inline RscConstants rsc_constants_quadratic(const QuadraticObjective& obj, const GroupPartition& p,
                                            std::size_t s, const RscOptions& opt = {})
{
    if (obj.dim() != p.n()) throw ContractError("rsc: objective / partition dimension mismatch");
    if (s > p.t()) throw ContractError("rsc: s exceeds the number of groups");
    if (s == 0) throw ContractError("rsc: s must be >= 1");
    if (obj.strictly_convex()) {
        Eigen::SelfAdjointEigenSolver<mat_t> es(obj.A(), Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues()(0) > 0)) throw ContractError("rsc: A is not positive definite");
    }

    RscConstants out;
    out.s = s;
    out.mu = std::numeric_limits<double>::infinity();
    out.L = -std::numeric_limits<double>::infinity();

    auto visit = [&](const group_set_t& groups) {
        const auto coords = p.coordinates(groups);
        const auto k = static_cast<index_t>(coords.size());
        mat_t sub(k, k);
        for (index_t a = 0; a < k; ++a)
            for (index_t c = 0; c < k; ++c) sub(a, c) = obj.A()(coords[a], coords[c]);
        Eigen::SelfAdjointEigenSolver<mat_t> es(sub, Eigen::EigenvaluesOnly);
        out.mu = std::min(out.mu, es.eigenvalues()(0));
        out.L = std::max(out.L, es.eigenvalues()(k - 1));
        ++out.subsets_examined;
    };

    if (binomial(p.t(), s) <= opt.enumeration_cap) {
        for_each_subset(p.t(), s, visit);
        out.certified = true;
    } else {
        std::mt19937_64 rng(opt.seed);
        group_set_t all(p.t());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (std::size_t trial = 0; trial < opt.samples; ++trial) {
            std::shuffle(all.begin(), all.end(), rng);
            group_set_t pick(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(s));
            std::sort(pick.begin(), pick.end());
            visit(pick);
        }
        out.certified = false;
    }
    return out;
}

struct RscCheckReport
{
    bool passed = true;
    std::size_t trials = 0;
    std::size_t violations = 0;
    // first violation, if any
    std::optional<std::size_t> first_trial;
    double first_curvature = 0; // 2 (l(b+d) - l(b) - <g,d>) / ||d||^2
    std::string first_side;    // "mu" or "L"
};

/**
 * Samples random beta and random Delta supported on at most s groups and
 * checks mu/2 ||Delta||^2 <= l(beta+Delta) - l(beta) - <grad l(beta), Delta> <= L/2 ||Delta||^2.
 */
inline RscCheckReport check_rsc_inequalities(const Objective& obj, const GroupPartition& p, std::size_t s,
                                             double mu, double L, std::size_t trials, std::uint64_t seed = 0)
{
    if (trials < 1) throw ContractError("check_rsc_inequalities: trials must be >= 1");
    if (obj.dim() != p.n()) throw ContractError("check_rsc_inequalities: dimension mismatch");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> logscale(-2.0, 1.0);

    RscCheckReport rep;
    rep.trials = trials;
    const std::size_t smax = std::min(s, p.t());
    group_set_t all(p.t());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        vec_t beta(static_cast<index_t>(p.n()));
        for (auto& v : beta) v = normal(rng);
        vec_t delta = vec_t::Zero(static_cast<index_t>(p.n()));
        if (smax > 0) {
            std::shuffle(all.begin(), all.end(), rng);
            const std::size_t sz = 1 + rng() % smax;
            const double scale = std::pow(10.0, logscale(rng));
            for (std::size_t q = 0; q < sz; ++q)
                for (auto j : p.group(all[q])) delta[j] = scale * normal(rng);
        }
        vec_t g;
        const double l0 = obj.value_and_gradient(beta, g);
        const double l1 = obj.value(beta + delta);
        const double gap = l1 - l0 - g.dot(delta);
        const double d2 = delta.squaredNorm();
        const double slack = 1e-9 * (1.0 + std::abs(l0) + std::abs(l1));
        const bool low_ok = gap >= 0.5 * mu * d2 - slack;
        const bool high_ok = gap <= 0.5 * L * d2 + slack;
        if (!(low_ok && high_ok)) {
            ++rep.violations;
            if (!rep.first_trial) {
                rep.first_trial = trial;
                rep.first_curvature = d2 > 0 ? 2.0 * gap / d2 : 0.0;
                rep.first_side = low_ok ? "L" : "mu";
            }
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

} // namespace groupsparse
