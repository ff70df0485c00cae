#pragma once
#include <cmath>
#include <groupsparse/objectives.hpp>
#include <groupsparse/solvers.hpp>

namespace groupsparse {

/// A selection algorithm could not pick a group (distinct from inner solver failure).
class SelectionError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * Threshold tau for the currently selected groups S: with beta_inf the
 * minimizer of l restricted to S and u_inf = -grad l(beta_inf),
 *     tau = max_{i not in S} ||u_inf|T_i||_2,
 * and argmax_set holds every unselected group within a relative tie
 * tolerance of tau.
 */
struct ThresholdReport
{
    double tau = 0;
    group_set_t argmax_set;
    vec_t group_grad_norms;  // all t groups; selected groups are ~0
    vec_t beta_inf;
    double objective = 0;    // l(beta_inf)
};

inline ThresholdReport threshold_tau(const Objective& obj, const GroupPartition& p,
                                     std::span<const std::size_t> selected, const SolverConfig& cfg = {},
                                     double tie_tol = 1e-9)
{
    const auto unselected = p.complement(selected);
    if (unselected.empty()) throw ContractError("threshold_tau: every group is already selected");
    ThresholdReport rep;
    rep.beta_inf = restricted_minimize(obj, p, selected, cfg).values;
    vec_t g;
    rep.objective = obj.value_and_gradient(rep.beta_inf, g);
    rep.group_grad_norms = group_norms(g, p);
    for (auto i : unselected) rep.tau = std::max(rep.tau, rep.group_grad_norms[i]);
    for (auto i : unselected) {
        if (rep.group_grad_norms[i] >= (1.0 - tie_tol) * rep.tau) rep.argmax_set.push_back(i);
    }
    return rep;
}

struct SelectionResult
{
    group_set_t selected;  // in order of selection
    SelectionTrace trace;
    vec_t beta;            // restricted minimizer over the final selection
    double objective = 0;
};

namespace detail {

inline double gradient_scale(const Objective& obj)
{
    return 1.0 + obj.gradient(vec_t::Zero(static_cast<index_t>(obj.dim()))).norm();
}

// Lowest index among the maximizers of `score` over `candidates`.
inline std::size_t argmax_lowest(const vec_t& score, std::span<const std::size_t> candidates)
{
    std::size_t best = candidates.front();
    for (auto i : candidates) if (score[i] > score[best]) best = i;
    return best;
}

inline bool contains(std::span<const std::size_t> set, std::size_t x)
{
    return std::find(set.begin(), set.end(), x) != set.end();
}

} // namespace detail

/// Group Orthogonal Matching Pursuit; `k` is recorded only, `kprime` rounds are run.
inline SelectionResult group_omp(const Objective& obj, const GroupPartition& p, std::size_t k,
                                 std::size_t kprime, const SolverConfig& cfg = {})
{
    (void)k;
    if (kprime > p.t()) throw ContractError("group_omp: k' exceeds the number of groups");
    SelectionResult res;
    res.trace.algorithm = "omp";
    const double stop_tol = cfg.grad_tol * detail::gradient_scale(obj);

    vec_t beta = vec_t::Zero(static_cast<index_t>(p.n()));
    double value = obj.value(beta);
    for (std::size_t r = 0; r < kprime; ++r) {
        const auto rep = threshold_tau(obj, p, res.selected, cfg);
        if (rep.tau <= stop_tol) {
            res.trace.stopped_early = true;
            break;
        }
        const auto unselected = p.complement(res.selected);
        const std::size_t pick = detail::argmax_lowest(rep.group_grad_norms, unselected);
        res.selected.push_back(pick);
        beta = restricted_minimize(obj, p, res.selected, cfg).values;
        const double next = obj.value(beta);

        TraceRecord rec;
        rec.round = r + 1;
        rec.selected = pick;
        rec.tau = rep.tau;
        rec.group_grad_norms = rep.group_grad_norms;
        rec.objective_before = rep.objective;
        rec.objective_after = next;
        res.trace.iterations.push_back(std::move(rec));
        value = next;
    }
    res.beta = beta;
    res.objective = value;
    return res;
}

struct OmprOptions
{
    std::size_t rounds = 0;        // R
    group_set_t initial;           // S0; empty means run group_omp for k' rounds
    std::optional<bool> regime;    // whether k' >= k (L2^2 / mu^2 + 1) is known to hold
};

/**
 * Group OMP with Replacement. Each round adds the unselected group with the
 * largest gradient norm and drops the selected group with the smallest
 * coefficient norm (ties to the lowest index); returns the visited set
 * S^0..S^R with the smallest restricted minimum (earliest on ties).
 */
inline SelectionResult group_ompr(const Objective& obj, const GroupPartition& p, std::size_t k,
                                  std::size_t kprime, const OmprOptions& opt, const SolverConfig& cfg = {})
{
    if (kprime > p.t()) throw ContractError("group_ompr: k' exceeds the number of groups");
    group_set_t current = opt.initial;
    if (current.empty() && kprime > 0) current = group_omp(obj, p, k, kprime, cfg).selected;
    if (current.size() != kprime && !(opt.initial.empty())) {
        throw ContractError("group_ompr: |S0| must equal k'");
    }
    detail::check_groups(p, current, "group_ompr");

    SelectionResult res;
    res.trace.algorithm = "ompr";
    res.trace.ompr_regime = opt.regime;
    const double stop_tol = cfg.grad_tol * detail::gradient_scale(obj);

    auto best_set = current;
    vec_t beta = restricted_minimize(obj, p, current, cfg).values;
    double value = obj.value(beta);
    vec_t best_beta = beta;
    double best_value = value;

    for (std::size_t r = 0; r < opt.rounds; ++r) {
        TraceRecord rec;
        rec.round = r + 1;
        rec.objective_before = value;
        const auto unselected = p.complement(current);
        vec_t g = obj.gradient(beta);
        rec.group_grad_norms = group_norms(g, p);
        double tau = 0;
        for (auto i : unselected) tau = std::max(tau, rec.group_grad_norms[i]);
        rec.tau = tau;
        if (unselected.empty() || current.empty() || tau <= stop_tol) {
            // restricted optimum is already stationary everywhere: S^{r+1} = S^r
            rec.fixed_point = true;
            rec.objective_after = value;
            rec.note = "fixed point";
            res.trace.iterations.push_back(std::move(rec));
            res.trace.stopped_early = true;
            break;
        }
        const std::size_t add = detail::argmax_lowest(rec.group_grad_norms, unselected);
        const vec_t coef_norms = group_norms(beta, p);
        std::size_t drop = current.front();
        for (auto j : current) {
            if (coef_norms[j] < coef_norms[drop] || (coef_norms[j] == coef_norms[drop] && j < drop)) drop = j;
        }
        current.erase(std::find(current.begin(), current.end(), drop));
        current.push_back(add);
        std::sort(current.begin(), current.end());

        beta = restricted_minimize(obj, p, current, cfg).values;
        value = obj.value(beta);
        rec.selected = add;
        rec.removed = drop;
        rec.objective_after = value;
        res.trace.iterations.push_back(std::move(rec));
        if (value < best_value) {
            best_value = value;
            best_set = current;
            best_beta = beta;
        }
    }
    res.selected = best_set;
    res.beta = best_beta;
    res.objective = best_value;
    return res;
}

/// Picks the penalized group with the largest coefficient norm above eta, if any.
struct LassoPick
{
    std::optional<std::size_t> pick;
    group_set_t active;     // penalized groups above the detection threshold
    vec_t beta;
    double lambda = 0;
};

inline LassoPick lasso_pick(const vec_t& beta, const GroupPartition& p, std::span<const std::size_t> penalized,
                            double lambda, std::optional<double> eta = std::nullopt)
{
    LassoPick out;
    out.beta = beta;
    out.lambda = lambda;
    const double thr = eta.value_or(default_detection_threshold(beta));
    const vec_t norms = group_norms(beta, p);
    for (auto i : penalized) {
        if (norms[i] > thr) out.active.push_back(i);
    }
    std::sort(out.active.begin(), out.active.end());
    if (!out.active.empty()) out.pick = detail::argmax_lowest(norms, out.active);
    return out;
}

/// One group LASSO solve at `lambda`, penalizing the unselected groups, warm-started at `warm`.
inline LassoPick lasso_select_at(const Objective& obj, const GroupPartition& p,
                                 std::span<const std::size_t> selected, double lambda,
                                 const SolverConfig& cfg = {}, const vec_t* warm = nullptr,
                                 LassoSolution* solution_out = nullptr)
{
    const auto penalized = p.complement(selected);
    auto sol = group_lasso_minimize(obj, p, penalized, lambda, cfg, warm);
    auto pick = lasso_pick(sol.beta.values, p, penalized, lambda);
    if (solution_out) *solution_out = std::move(sol);
    return pick;
}

struct SequentialOptions
{
    double delta = 1e-2;  // lambda = (1 - delta) tau
    double tie_tol = 1e-9;
    std::size_t restarts = 3;  // attention only
};

namespace detail {

// Shared driver for sequential LASSO and sequential attention. `inner`
// returns the pick at a given lambda for the current selection.
template <class Inner>
SelectionResult sequential_select(const Objective& obj, const GroupPartition& p, std::size_t kprime,
                                  const SolverConfig& cfg, const SequentialOptions& opt, const char* name,
                                  Inner&& inner)
{
    if (kprime > p.t()) throw ContractError(std::string(name) + ": k' exceeds the number of groups");
    if (!(opt.delta > 0 && opt.delta < 1)) throw ContractError(std::string(name) + ": delta must lie in (0,1)");
    SelectionResult res;
    res.trace.algorithm = name;
    const double stop_tol = cfg.grad_tol * gradient_scale(obj);
    vec_t beta = vec_t::Zero(static_cast<index_t>(p.n()));
    double value = obj.value(beta);

    for (std::size_t r = 0; r < kprime; ++r) {
        const auto rep = threshold_tau(obj, p, res.selected, cfg, opt.tie_tol);
        if (rep.tau <= stop_tol) {
            res.trace.stopped_early = true;
            break;
        }
        TraceRecord rec;
        rec.round = r + 1;
        rec.tau = rep.tau;
        rec.group_grad_norms = rep.group_grad_norms;
        rec.objective_before = rep.objective;

        double delta = opt.delta;
        LassoPick pick;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const double lambda = (1.0 - delta) * rep.tau;
            pick = inner(res.selected, lambda, rep);
            rec.lambda = lambda;
            bool clean = pick.pick.has_value();
            for (auto i : pick.active) clean = clean && contains(rep.argmax_set, i);
            if (clean) break;
            if (attempt == 0) {
                ++rec.delta_retries;
                delta /= 10.0;
            }
        }
        if (!pick.pick) {
            throw SelectionError(std::string(name) + ": no penalized group became active below tau (round "
                                 + std::to_string(r + 1) + ")");
        }
        rec.selected = *pick.pick;
        rec.in_argmax_set = contains(rep.argmax_set, *pick.pick);
        res.selected.push_back(*pick.pick);
        beta = restricted_minimize(obj, p, res.selected, cfg).values;
        value = obj.value(beta);
        rec.objective_after = value;
        res.trace.iterations.push_back(std::move(rec));
    }
    res.beta = beta;
    res.objective = value;
    return res;
}

} // namespace detail

/**
 * Group Sequential LASSO. Each round computes tau for the current selection,
 * solves the group LASSO on the unselected groups at lambda = (1 - delta) tau
 * (warm-started at the restricted minimizer), and adds the penalized group
 * with the largest coefficient norm. If the solve activates nothing, or
 * activates a group outside the argmax set, it is retried once at delta / 10.
 */
inline SelectionResult sequential_lasso(const Objective& obj, const GroupPartition& p, std::size_t kprime,
                                        const SolverConfig& cfg = {}, const SequentialOptions& opt = {})
{
    return detail::sequential_select(obj, p, kprime, cfg, opt, "seq-lasso",
        [&](const group_set_t& selected, double lambda, const ThresholdReport& rep) {
            return lasso_select_at(obj, p, selected, lambda, cfg, &rep.beta_inf);
        });
}

/// Group Sequential Attention: sequential_lasso with the attention-factorized inner problem.
inline SelectionResult sequential_attention(const Objective& obj, const GroupPartition& p, std::size_t kprime,
                                            const SolverConfig& cfg = {}, const SequentialOptions& opt = {})
{
    return detail::sequential_select(obj, p, kprime, cfg, opt, "seq-attention",
        [&](const group_set_t& selected, double lambda, const ThresholdReport&) {
            const auto penalized = p.complement(selected);
            const auto att = attention_minimize(obj, p, penalized, lambda, cfg, opt.restarts);
            return lasso_pick(att.effective, p, penalized, lambda);
        });
}

} // namespace groupsparse
