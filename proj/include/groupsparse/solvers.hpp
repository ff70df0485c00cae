#pragma once
#include <cstdint>
#include <limits>
#include <random>
#include <groupsparse/core.hpp>

namespace groupsparse {

struct SolverConfig
{
    double grad_tol = 1e-10;
    std::size_t max_iters = 100000;
    double backtrack = 0.5;
    // momentum with a monotone fallback step; off by default
    bool accelerated = false;
    std::size_t restarts = 3;
    std::uint64_t seed = 0;
    // keep the composite objective after every accepted step
    bool record_history = false;

    void validate() const
    {
        if (!(grad_tol > 0)) throw ContractError("solver config: grad_tol must be > 0");
        if (max_iters < 1) throw ContractError("solver config: max_iters must be >= 1");
        if (!(backtrack > 0 && backtrack < 1)) throw ContractError("solver config: backtrack must be in (0,1)");
    }
};

/// Iterative solver ran out of iterations (or step size) before meeting its tolerance.
class SolverError : public std::runtime_error
{
public:
    SolverError(const std::string& what, vec_t best, double residual, std::size_t iterations)
        : std::runtime_error(what), best_(std::move(best)), residual_(residual), iterations_(iterations)
    {}

    const vec_t& best_iterate() const { return best_; }
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    vec_t best_;
    double residual_;
    std::size_t iterations_;
};

namespace detail {

// Function values below this many ulps apart are indistinguishable.
inline double noise_floor(double f)
{
    return 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
}

inline void check_groups(const GroupPartition& p, std::span<const std::size_t> groups, const char* what)
{
    std::vector<char> seen(p.t(), 0);
    for (auto i : groups) {
        if (i >= p.t()) throw ContractError(std::string(what) + ": group index out of range");
        if (seen[i]) throw ContractError(std::string(what) + ": duplicate group index");
        seen[i] = 1;
    }
}

inline std::vector<char> group_mask(const GroupPartition& p, std::span<const std::size_t> groups)
{
    std::vector<char> m(p.t(), 0);
    for (auto i : groups) m[i] = 1;
    return m;
}

inline double bb_step(const vec_t& dx, const vec_t& dg, double fallback)
{
    const double sy = dx.dot(dg);
    if (sy > 0) {
        const double s = dx.squaredNorm() / sy;
        if (std::isfinite(s) && s > 0) return std::clamp(s, 1e-20, 1e20);
    }
    return std::clamp(2.0 * fallback, 1e-20, 1e20);
}

inline double initial_step(const Objective& obj, const vec_t& x, const vec_t& g_dir)
{
    const double gn = g_dir.norm();
    if (gn == 0) return 1.0;
    const double h = 1e-4 * (1.0 + x.norm());
    const vec_t d = (h / gn) * g_dir;
    const double curv = (obj.gradient(x - d) - obj.gradient(x)).norm() / h;
    return curv > 0 && std::isfinite(curv) ? 1.0 / curv : 1.0;
}

} // namespace detail

/**
 * Minimizer of l over {beta : beta|T_i = 0 for all i not in selected}.
 *
 * Uses the objective's exact restricted minimizer when it has one
 * (quadratics: a symmetric linear solve on the selected block). Otherwise
 * runs gradient descent on the selected coordinates with Barzilai-Borwein
 * trial steps and Armijo backtracking until
 *     ||grad l(beta)|_selected||_2 <= grad_tol * (1 + ||grad l(0)||_2).
 * Coordinates outside the selected groups are exactly zero.
 */
inline Coefficients restricted_minimize(const Objective& obj, const GroupPartition& p,
                                        std::span<const std::size_t> selected, const SolverConfig& cfg = {})
{
    cfg.validate();
    if (obj.dim() != p.n()) throw ContractError("restricted_minimize: objective / partition dimension mismatch");
    detail::check_groups(p, selected, "restricted_minimize");
    const auto coords = p.coordinates(selected);
    const auto n = static_cast<index_t>(p.n());
    if (coords.empty()) return Coefficients(vec_t::Zero(n), p);
    if (auto exact = obj.exact_restricted_minimizer(coords)) return Coefficients(std::move(*exact), p);

    auto project = [&](const vec_t& g) {
        vec_t out = vec_t::Zero(n);
        for (auto j : coords) out[j] = g[j];
        return out;
    };

    vec_t x = vec_t::Zero(n);
    vec_t g;
    double f = obj.value_and_gradient(x, g);
    const double tol = cfg.grad_tol * (1.0 + g.norm());
    vec_t gs = project(g);
    double step = detail::initial_step(obj, x, gs);

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const double gnorm = gs.norm();
        if (gnorm <= tol) return Coefficients(std::move(x), p);

        vec_t xn, gn;
        double fn = 0;
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            xn = x - step * gs;
            fn = obj.value_and_gradient(xn, gn);
            if (std::isfinite(fn) && fn <= f - 1e-4 * step * gnorm * gnorm + detail::noise_floor(f)) {
                accepted = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            throw SolverError("restricted_minimize: line search stalled", x, gnorm, iter);
        }
        vec_t gsn = project(gn);
        step = detail::bb_step(xn - x, gsn - gs, step);
        x = std::move(xn);
        g = std::move(gn);
        gs = std::move(gsn);
        f = fn;
    }
    const double res = gs.norm();
    if (res <= tol) return Coefficients(std::move(x), p);
    throw SolverError("restricted_minimize: no convergence within max_iters", x, res, cfg.max_iters);
}

/// Proximal map of kappa * ||.||_2: max(0, 1 - kappa / ||v||) v.
inline vec_t group_soft_threshold(const vec_t& v, double kappa)
{
    if (kappa < 0) throw ContractError("group_soft_threshold: amount must be >= 0");
    const double nv = v.norm();
    if (nv <= kappa) return vec_t::Zero(v.size());
    return (1.0 - kappa / nv) * v;
}

struct LassoSolution
{
    Coefficients beta;
    double lambda = 0;
    group_set_t penalized_set{};
    double kkt_residual = 0;
    bool converged = false;
    std::size_t iterations = 0;
    // l(beta) + lambda * sum over penalized groups of ||beta|T_i||_2
    double objective = 0;
    std::vector<double> history{};
};

/**
 * Optimality residual of the group LASSO restricted to the penalized groups:
 * max over groups of
 *   ||g_i||                                  unpenalized,
 *   max(0, ||g_i|| - lambda)                 penalized with beta_i = 0,
 *   ||g_i + lambda beta_i / ||beta_i|| ||    penalized with beta_i != 0.
 */
inline double group_lasso_kkt_residual(const vec_t& beta, const vec_t& grad, const GroupPartition& p,
                                       const std::vector<char>& penalized, double lambda)
{
    double res = 0;
    for (std::size_t i = 0; i < p.t(); ++i) {
        const auto& grp = p.group(i);
        const double gn = group_norm(grad, grp);
        if (!penalized[i]) {
            res = std::max(res, gn);
            continue;
        }
        const double bn = group_norm(beta, grp);
        if (bn == 0) {
            res = std::max(res, gn - lambda);
        } else {
            double a = 0;
            for (auto j : grp) {
                const double r = grad[j] + lambda * beta[j] / bn;
                a += r * r;
            }
            res = std::max(res, std::sqrt(a));
        }
    }
    return res;
}

/**
 * argmin_beta l(beta) + lambda * sum_{i in penalized} ||beta|T_i||_2.
 *
 * Monotone proximal gradient: each trial step from the current iterate is
 * accepted only if it satisfies the quadratic upper bound of l at the
 * trial step size (so the composite objective cannot increase); trial step
 * sizes come from Barzilai-Borwein. Terminates once the KKT residual is at
 * most grad_tol * (1 + lambda).
 */
inline LassoSolution group_lasso_minimize(const Objective& obj, const GroupPartition& p,
                                          std::span<const std::size_t> penalized, double lambda,
                                          const SolverConfig& cfg = {}, const vec_t* warm_start = nullptr)
{
    cfg.validate();
    if (lambda < 0 || !std::isfinite(lambda)) throw ContractError("group_lasso_minimize: lambda must be >= 0");
    if (obj.dim() != p.n()) throw ContractError("group_lasso_minimize: objective / partition dimension mismatch");
    if (!obj.strictly_convex()) throw ContractError("group_lasso_minimize: objective must be strictly convex");
    detail::check_groups(p, penalized, "group_lasso_minimize");
    const auto n = static_cast<index_t>(p.n());
    const auto pen = detail::group_mask(p, penalized);

    auto penalty = [&](const vec_t& b) {
        double s = 0;
        for (std::size_t i = 0; i < p.t(); ++i) if (pen[i]) s += group_norm(b, p.group(i));
        return lambda * s;
    };
    auto prox = [&](const vec_t& z, double step) {
        vec_t out = z;
        for (std::size_t i = 0; i < p.t(); ++i) {
            if (!pen[i]) continue;
            const auto& grp = p.group(i);
            const double zn = group_norm(z, grp);
            const double shrink = zn <= step * lambda ? 0.0 : 1.0 - step * lambda / zn;
            for (auto j : grp) out[j] = shrink * z[j];
        }
        return out;
    };

    vec_t x = vec_t::Zero(n);
    if (warm_start) {
        check_dim(*warm_start, p.n(), "group_lasso_minimize warm start");
        x = *warm_start;
    }
    vec_t g;
    double f = obj.value_and_gradient(x, g);
    double F = f + penalty(x);
    const double tol = cfg.grad_tol * (1.0 + lambda);
    double step = detail::initial_step(obj, x, g);

    LassoSolution sol{Coefficients(x, p), lambda, group_set_t(penalized.begin(), penalized.end())};
    std::sort(sol.penalized_set.begin(), sol.penalized_set.end());
    if (cfg.record_history) sol.history.push_back(F);

    vec_t x_prev = x;
    double momentum_t = 1.0;

    // One proximal step from `from` (gradient `g_from`, value `f_from`) with backtracking.
    auto prox_step = [&](const vec_t& from, const vec_t& g_from, double f_from, vec_t& xn, vec_t& gn,
                         double& fn) -> bool {
        for (int bt = 0; bt < 80; ++bt) {
            xn = prox(from - step * g_from, step);
            fn = obj.value_and_gradient(xn, gn);
            const vec_t d = xn - from;
            if (std::isfinite(fn)
                && fn <= f_from + g_from.dot(d) + d.squaredNorm() / (2.0 * step) + detail::noise_floor(f_from)) {
                return true;
            }
            step *= cfg.backtrack;
        }
        return false;
    };

    std::size_t iter = 0;
    double res = group_lasso_kkt_residual(x, g, p, pen, lambda);
    for (; iter < cfg.max_iters && res > tol; ++iter) {
        vec_t xn, gn;
        double fn = 0;
        bool ok = false;
        if (cfg.accelerated && iter > 0) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
            const vec_t y = x + ((momentum_t - 1.0) / t_next) * (x - x_prev);
            momentum_t = t_next;
            vec_t gy;
            const double fy = obj.value_and_gradient(y, gy);
            ok = prox_step(y, gy, fy, xn, gn, fn) && fn + penalty(xn) <= F + detail::noise_floor(F);
            // restart momentum when it no longer points along the proximal step
            if (!ok || (y - xn).dot(xn - x) > 0) momentum_t = 1.0;
        }
        if (!ok) ok = prox_step(x, g, f, xn, gn, fn);
        if (!ok) break;
        const double Fn = fn + penalty(xn);
        if (Fn > F + detail::noise_floor(F)) break;
        // momentum runs take the backtracked step as is; plain steps try Barzilai-Borwein
        if (!cfg.accelerated) step = detail::bb_step(xn - x, gn - g, step);
        x_prev = x;
        x = std::move(xn);
        g = std::move(gn);
        f = fn;
        F = Fn;
        if (cfg.record_history) sol.history.push_back(F);
        res = group_lasso_kkt_residual(x, g, p, pen, lambda);
    }

    sol.beta = Coefficients(x, p);
    sol.kkt_residual = res;
    sol.converged = res <= tol;
    sol.iterations = iter;
    sol.objective = F;
    if (!sol.converged) {
        throw SolverError("group_lasso_minimize: no convergence (kkt residual " + std::to_string(res) + ")",
                          x, res, iter);
    }
    return sol;
}

struct AttentionResult
{
    vec_t w;          // length t; selected (unpenalized) groups carry w_i = 1
    vec_t beta;       // factor beta; the effective point is beta_w
    vec_t effective;  // beta_w|T_i = w_i * beta|T_i
    double value = 0;
    double lasso_value = 0;
    double mapped_value = 0;
    std::size_t best_start = 0;  // 0 = mapped from the LASSO solution, >0 = random restarts
    std::vector<double> start_values;
    std::vector<char> start_converged;
};

/// Value of the attention-factorized objective
/// l(beta_w) + lambda/2 * sum_{i in penalized} (w_i^2 + ||beta|T_i||^2).
inline double attention_objective(const Objective& obj, const GroupPartition& p,
                                  std::span<const std::size_t> penalized, double lambda, const vec_t& w,
                                  const vec_t& beta)
{
    vec_t eff = beta;
    for (std::size_t i = 0; i < p.t(); ++i)
        for (auto j : p.group(i)) eff[j] *= w[i];
    double reg = 0;
    for (auto i : penalized) reg += w[i] * w[i] + std::pow(group_norm(beta, p.group(i)), 2);
    return obj.value(eff) + 0.5 * lambda * reg;
}

/**
 * Minimizes the attention-factorized form of the group LASSO over (w, beta).
 * Nonconvex; runs gradient descent with backtracking from one start mapped
 * from the group LASSO solution (w_i = sqrt(||b_i||), beta_i = b_i / w_i)
 * plus `restarts` random starts, and keeps the best converged value.
 * Groups outside `penalized` are neither regularized nor reweighted (w_i = 1).
 */
inline AttentionResult attention_minimize(const Objective& obj, const GroupPartition& p,
                                          std::span<const std::size_t> penalized, double lambda,
                                          const SolverConfig& cfg = {}, std::size_t restarts = 3)
{
    cfg.validate();
    if (!(lambda > 0)) throw ContractError("attention_minimize: lambda must be > 0");
    if (restarts < 1) throw ContractError("attention_minimize: restarts must be >= 1");
    const auto n = static_cast<index_t>(p.n());
    const auto t = static_cast<index_t>(p.t());
    const auto pen = detail::group_mask(p, penalized);

    const LassoSolution lasso = group_lasso_minimize(obj, p, penalized, lambda, cfg);

    // Packs (beta, w_penalized) into one vector z; w for unpenalized groups is fixed at 1.
    std::vector<std::size_t> pen_ids;
    for (std::size_t i = 0; i < p.t(); ++i) if (pen[i]) pen_ids.push_back(i);
    const auto m = static_cast<index_t>(pen_ids.size());

    auto unpack_w = [&](const vec_t& z) {
        vec_t w = vec_t::Ones(t);
        for (index_t q = 0; q < m; ++q) w[pen_ids[q]] = z[n + q];
        return w;
    };
    auto eval = [&](const vec_t& z, vec_t& grad) {
        const vec_t w = unpack_w(z);
        vec_t eff = z.head(n);
        for (std::size_t i = 0; i < p.t(); ++i)
            for (auto j : p.group(i)) eff[j] *= w[i];
        vec_t g;
        double val = obj.value_and_gradient(eff, g);
        grad.resize(n + m);
        for (std::size_t i = 0; i < p.t(); ++i)
            for (auto j : p.group(i)) grad[j] = w[i] * g[j];
        for (index_t q = 0; q < m; ++q) {
            const auto& grp = p.group(pen_ids[q]);
            double inner = 0, bsq = 0;
            for (auto j : grp) {
                inner += g[j] * z[j];
                bsq += z[j] * z[j];
                grad[j] += lambda * z[j];
            }
            const double wi = z[n + q];
            grad[n + q] = inner + lambda * wi;
            val += 0.5 * lambda * (wi * wi + bsq);
        }
        return val;
    };

    const double scale = 1.0 + obj.gradient(vec_t::Zero(n)).norm();
    const double tol = cfg.grad_tol * scale;

    struct Run { vec_t z; double value; bool converged; };
    auto descend = [&](vec_t z) -> Run {
        vec_t g;
        double f = eval(z, g);
        double step = 1.0 / scale;
        for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
            const double gnorm = g.norm();
            if (gnorm <= tol) return {std::move(z), f, true};
            vec_t zn, gn;
            double fn = 0;
            bool accepted = false;
            for (int bt = 0; bt < 80; ++bt) {
                zn = z - step * g;
                fn = eval(zn, gn);
                if (std::isfinite(fn) && fn <= f - 1e-4 * step * gnorm * gnorm + detail::noise_floor(f)) {
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if (!accepted) return {std::move(z), f, g.norm() <= tol};
            step = detail::bb_step(zn - z, gn - g, step);
            z = std::move(zn);
            g = std::move(gn);
            f = fn;
        }
        return {std::move(z), f, g.norm() <= tol};
    };

    std::vector<vec_t> starts;
    {
        vec_t z = vec_t::Zero(n + m);
        const vec_t& b = lasso.beta.values;
        for (std::size_t i = 0; i < p.t(); ++i)
            if (!pen[i]) for (auto j : p.group(i)) z[j] = b[j];
        for (index_t q = 0; q < m; ++q) {
            const auto& grp = p.group(pen_ids[q]);
            const double bn = group_norm(b, grp);
            if (bn > 0) {
                const double wi = std::sqrt(bn);
                z[n + q] = wi;
                for (auto j : grp) z[j] = b[j] / wi;
            }
        }
        starts.push_back(std::move(z));
    }
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    const double spread = std::max(1e-3, lasso.beta.values.norm() / std::sqrt(static_cast<double>(std::max<index_t>(n, 1))));
    for (std::size_t r = 0; r < restarts; ++r) {
        vec_t z(n + m);
        for (index_t j = 0; j < n; ++j) z[j] = spread * normal(rng);
        for (index_t q = 0; q < m; ++q) z[n + q] = unif(rng);
        starts.push_back(std::move(z));
    }

    AttentionResult out;
    out.lasso_value = lasso.objective;
    {
        vec_t unused;
        out.mapped_value = eval(starts.front(), unused);
    }
    bool have = false;
    Run best{vec_t(), 0, false};
    for (std::size_t s = 0; s < starts.size(); ++s) {
        Run run = descend(starts[s]);
        out.start_values.push_back(run.value);
        out.start_converged.push_back(run.converged ? 1 : 0);
        if (run.converged && (!have || run.value < best.value - detail::noise_floor(best.value))) {
            best = std::move(run);
            out.best_start = s;
            have = true;
        }
    }
    if (!have) {
        throw SolverError("attention_minimize: no start converged", starts.front().head(n), 0.0, cfg.max_iters);
    }
    out.w = unpack_w(best.z);
    out.beta = best.z.head(n);
    out.effective = out.beta;
    for (std::size_t i = 0; i < p.t(); ++i)
        for (auto j : p.group(i)) out.effective[j] *= out.w[i];
    out.value = best.value;
    return out;
}

} // namespace groupsparse
