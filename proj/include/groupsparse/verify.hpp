#pragma once
#include <atomic>
#include <functional>
#include <map>
#include <thread>
#include <groupsparse/instance.hpp>
#include <groupsparse/selection.hpp>

namespace groupsparse {
namespace verify {

/// Best restricted minimum over all supports of at most k groups.
struct OracleResult
{
    group_set_t best_support;
    double opt_value = 0;
    std::size_t enumerated_count = 0;
    vec_t beta;
};

inline OracleResult brute_force_best_subset(const Objective& obj, const GroupPartition& p, std::size_t k,
                                            const SolverConfig& cfg = {}, double cap = 1e5)
{
    k = std::min(k, p.t());
    double total = 0;
    for (std::size_t s = 0; s <= k; ++s) total += binomial(p.t(), s);
    if (total > cap) {
        throw ContractError("brute_force_best_subset: " + std::to_string(static_cast<long long>(total))
                            + " supports exceed the cap");
    }
    OracleResult out;
    out.beta = vec_t::Zero(static_cast<index_t>(p.n()));
    out.opt_value = obj.value(out.beta);
    for (std::size_t s = 0; s <= k; ++s) {
        for_each_subset(p.t(), s, [&](const group_set_t& support) {
            ++out.enumerated_count;
            if (support.empty()) return;
            const auto beta = restricted_minimize(obj, p, support, cfg).values;
            const double v = obj.value(beta);
            if (v < out.opt_value) {
                out.opt_value = v;
                out.best_support = support;
                out.beta = beta;
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------

struct CheckTally
{
    std::string name;
    std::size_t count = 0;
    std::size_t passes = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
};

struct ClaimFailure
{
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string check;
    std::string detail;
    io::json instance;
};

/**
 * Outcome of certifying one claim over many seeded instances. A check
 * passes when its slack (bound minus measured, oriented so that >= 0 is
 * good) is non-negative; worst_slack is the minimum over all checks.
 */
struct ClaimReport
{
    std::string claim;
    std::size_t instances = 0;
    std::size_t passes = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    std::map<std::string, double> params;
    std::map<std::string, double> counters;
    std::vector<CheckTally> checks;
    std::vector<ClaimFailure> failures;

    bool all_passed() const { return instances > 0 && passes == instances; }

    const CheckTally* check(const std::string& name) const
    {
        for (const auto& c : checks) if (c.name == name) return &c;
        return nullptr;
    }
};

/// Per-trial accumulator; merged into the report in trial order.
class TrialLog
{
public:
    TrialLog(std::size_t trial, std::uint64_t seed) : trial_(trial), seed_(seed) {}

    bool check(const std::string& name, double slack, const std::string& detail = {})
    {
        const bool ok = slack >= 0 && !std::isnan(slack);
        entries_.push_back({name, slack, ok});
        if (!ok) failures_.push_back({trial_, seed_, name, detail, {}});
        return ok;
    }

    void fail(const std::string& name, const std::string& detail) { check(name, -std::numeric_limits<double>::infinity(), detail); }
    void count(const std::string& name, double v = 1.0) { counters_[name] += v; }
    void set_instance(io::json j) { instance_ = std::move(j); }

    bool passed() const { return failures_.empty(); }

    void merge_into(ClaimReport& rep) const
    {
        ++rep.instances;
        if (passed()) ++rep.passes;
        for (const auto& e : entries_) {
            auto it = std::find_if(rep.checks.begin(), rep.checks.end(),
                                   [&](const CheckTally& c) { return c.name == e.name; });
            if (it == rep.checks.end()) {
                rep.checks.push_back({e.name});
                it = rep.checks.end() - 1;
            }
            ++it->count;
            if (e.ok) ++it->passes;
            it->worst_slack = std::min(it->worst_slack, e.slack);
            rep.worst_slack = std::min(rep.worst_slack, e.slack);
        }
        for (auto f : failures_) {
            f.instance = instance_;
            rep.failures.push_back(std::move(f));
        }
        for (const auto& [k, v] : counters_) rep.counters[k] += v;
    }

private:
    struct Entry { std::string name; double slack; bool ok; };
    std::size_t trial_;
    std::uint64_t seed_;
    std::vector<Entry> entries_;
    std::vector<ClaimFailure> failures_;
    std::map<std::string, double> counters_;
    io::json instance_;
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t trial)
{
    // splitmix64 finalizer over (base, trial)
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Runs body(i, log) for i in [0, trials) on up to `jobs` threads; logs merge in index order.
template <class Body>
ClaimReport run_trials(const std::string& claim, std::size_t trials, std::uint64_t seed, std::size_t jobs,
                       Body&& body)
{
    std::vector<std::optional<TrialLog>> logs(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < trials; i = next++) {
            TrialLog log(i, trial_seed(seed, i));
            try {
                body(i, trial_seed(seed, i), log);
            } catch (const std::exception& e) {
                log.fail("exception", e.what());
            }
            logs[i] = std::move(log);
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, trials));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    ClaimReport rep;
    rep.claim = claim;
    for (auto& l : logs) l->merge_into(rep);
    return rep;
}

using Generator = std::function<Instance(std::uint64_t seed)>;

/// Exact RSC/RSM constants of a quadratic, memoized by sparsity level.
class ConstantsCache
{
public:
    ConstantsCache(const QuadraticObjective& q, const GroupPartition& p) : q_(q), p_(p) {}

    const RscConstants& at(std::size_t s)
    {
        s = std::clamp<std::size_t>(s, 1, p_.t());
        auto it = cache_.find(s);
        if (it == cache_.end()) {
            it = cache_.emplace(s, rsc_constants_quadratic(q_, p_, s)).first;
            if (!it->second.certified) throw ContractError("constants at s=" + std::to_string(s) + " not certified");
        }
        return it->second;
    }

private:
    const QuadraticObjective& q_;
    const GroupPartition& p_;
    std::map<std::size_t, RscConstants> cache_;
};

// ---------------------------------------------------------------------------

struct EquivalenceOptions
{
    std::size_t rounds = 3;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    double delta = 1e-2;
    double above_factor = 1.01;
    double tie_tol = 1e-9;
    double dual_rel_tol = 1e-8;
    double alignment_tol = 1e-6;
    SolverConfig cfg{};
};

namespace detail {

// Dual feasibility and alignment of a converged LASSO solution with u = -grad l(beta).
inline void check_lasso_kkt(TrialLog& log, const Objective& obj, const GroupPartition& p, const LassoSolution& sol,
                            const EquivalenceOptions& opt)
{
    const vec_t g = obj.gradient(sol.beta.values);
    const auto pen = groupsparse::detail::group_mask(p, sol.penalized_set);
    double max_pen = 0, max_unpen = 0, max_align = 0;
    for (std::size_t i = 0; i < p.t(); ++i) {
        const auto& grp = p.group(i);
        const double gn = group_norm(g, grp);
        if (!pen[i]) {
            max_unpen = std::max(max_unpen, gn);
            continue;
        }
        max_pen = std::max(max_pen, gn);
        const double bn = group_norm(sol.beta.values, grp);
        if (bn > 0) {
            double a = 0;
            for (auto j : grp) a += std::pow(g[j] + sol.lambda * sol.beta.values[j] / bn, 2);
            max_align = std::max(max_align, std::sqrt(a));
        }
    }
    const double lam = sol.lambda;
    log.check("dual_feasible", lam * (1.0 + opt.dual_rel_tol) - max_pen,
              "max penalized gradient norm " + std::to_string(max_pen) + " vs lambda " + std::to_string(lam));
    log.check("unpenalized_stationary", 1e-8 * (1.0 + lam) - max_unpen,
              "unpenalized gradient norm " + std::to_string(max_unpen));
    log.check("alignment", opt.alignment_tol * (1.0 + lam) - max_align,
              "alignment residual " + std::to_string(max_align));
}

} // namespace detail

/**
 * For each instance and round: the group chosen by one sequential LASSO
 * round lies in the argmax set of the threshold report; above tau the
 * penalized support is empty; just below tau it is nonempty and inside the
 * argmax set; every LASSO solution satisfies the dual constraints.
 */
inline ClaimReport certify_equivalence(const Generator& generate, const EquivalenceOptions& opt = {})
{
    auto rep = run_trials("equivalence", opt.trials, opt.seed, opt.jobs,
        [&](std::size_t, std::uint64_t seed, TrialLog& log) {
            const Instance inst = generate(seed);
            log.set_instance(instance_to_json(inst));
            const auto obj = inst.make_objective();
            const auto& p = *inst.partition;
            const double stop_tol = opt.cfg.grad_tol * groupsparse::detail::gradient_scale(*obj);
            group_set_t S;
            for (std::size_t r = 0; r < opt.rounds && S.size() < p.t(); ++r) {
                const auto rep = threshold_tau(*obj, p, S, opt.cfg, opt.tie_tol);
                if (rep.tau <= stop_tol) {
                    log.count("early_stops");
                    break;
                }
                log.count("rounds");
                if (rep.argmax_set.size() > 1) log.count("ties");

                LassoSolution above{Coefficients(rep.beta_inf, p)};
                const auto pick_above = lasso_select_at(*obj, p, S, opt.above_factor * rep.tau, opt.cfg,
                                                        &rep.beta_inf, &above);
                double max_above = 0;
                for (auto i : p.complement(S)) max_above = std::max(max_above, group_norm(above.beta.values, p.group(i)));
                log.check("above_tau_empty", pick_above.active.empty() ? 1.0 : -max_above,
                          "penalized support nonempty at lambda = " + std::to_string(opt.above_factor) + " tau");
                detail::check_lasso_kkt(log, *obj, p, above, opt);

                double delta = opt.delta;
                LassoPick pick;
                LassoSolution below{Coefficients(rep.beta_inf, p)};
                for (int attempt = 0; attempt < 2; ++attempt) {
                    pick = lasso_select_at(*obj, p, S, (1.0 - delta) * rep.tau, opt.cfg, &rep.beta_inf, &below);
                    bool clean = pick.pick.has_value();
                    for (auto i : pick.active) clean = clean && groupsparse::detail::contains(rep.argmax_set, i);
                    if (clean) break;
                    if (attempt == 0) {
                        log.count("delta_retries");
                        delta /= 10.0;
                    }
                }
                detail::check_lasso_kkt(log, *obj, p, below, opt);
                auto subset_of_argmax = [&](const LassoPick& lp) {
                    bool ok = !lp.active.empty();
                    for (auto i : lp.active) ok = ok && groupsparse::detail::contains(rep.argmax_set, i);
                    return ok;
                };
                bool subset = subset_of_argmax(pick);
                // The threshold claim holds once (1 - delta) tau exceeds every gradient norm
                // outside the argmax set; near ties need a delta below that gap.
                double runner_up = 0;
                for (auto i : p.complement(S))
                    if (!groupsparse::detail::contains(rep.argmax_set, i))
                        runner_up = std::max(runner_up, rep.group_grad_norms[i] / rep.tau);
                const double gap_delta = 0.5 * (1.0 - runner_up);
                if (!subset && gap_delta < delta) {
                    log.count("threshold_gap_limited");
                    LassoSolution tight{Coefficients(rep.beta_inf, p)};
                    subset = subset_of_argmax(
                        lasso_select_at(*obj, p, S, (1.0 - gap_delta) * rep.tau, opt.cfg, &rep.beta_inf, &tight));
                    detail::check_lasso_kkt(log, *obj, p, tight, opt);
                }
                log.check("below_tau_nonempty_subset", subset ? 1.0 : -1.0,
                          "active set below tau is empty or leaves the argmax set");
                if (!pick.pick) {
                    log.fail("selected_in_argmax", "no group selected");
                    break;
                }
                const double ratio = rep.group_grad_norms[*pick.pick] / rep.tau;
                log.check("selected_in_argmax", ratio - (1.0 - opt.tie_tol),
                          "selected group " + std::to_string(*pick.pick) + " has gradient ratio "
                              + std::to_string(ratio));
                S.push_back(*pick.pick);
            }
        });
    rep.params["rounds"] = static_cast<double>(opt.rounds);
    rep.params["delta"] = opt.delta;
    rep.params["above_factor"] = opt.above_factor;
    return rep;
}

// ---------------------------------------------------------------------------

struct OmpGuaranteeOptions
{
    std::size_t k = 2;
    std::size_t trials = 50;
    std::uint64_t seed = 2;
    std::size_t jobs = 1;
    double eps_rel = 1e-3;  // eps = eps_rel * (l(0) - OPT)
    double slack = 1e-9;    // times max(1, |l(0)|)
    SolverConfig cfg{};
};

/**
 * Smallest k' >= k with k' >= k (L1 / mu_{k+k'}) log(gap / eps), capped at t.
 * mu_{k+k'} shrinks as k' grows, so k' is increased one step at a time.
 */
inline std::size_t omp_bicriteria_kprime(ConstantsCache& cc, std::size_t k, std::size_t t, double gap, double eps)
{
    const double L1 = cc.at(1).L;
    std::size_t kp = k;
    while (kp < t) {
        const double mu = cc.at(k + kp).mu;
        const double need = std::ceil(static_cast<double>(k) * (L1 / mu) * std::log(gap / eps));
        if (static_cast<double>(kp) >= need) break;
        ++kp;
    }
    return kp;
}

/**
 * Group OMP on quadratics with exact constants and brute-force OPT:
 *   exact_k:     l(0) - l(beta^(k)) >= (1 - exp(-mu_2k / L1)) (l(0) - OPT)
 *   bicriteria:  after k' rounds (see omp_bicriteria_kprime), l <= OPT + eps
 *   stepwise:    l(beta^(r)) - OPT <= exp(-(r/k) mu_{k+k'} / L1) (l(0) - OPT)
 *   smoothness:  l(beta^(r)) - l(beta^(r+1)) >= max_i ||grad_i||^2 / (2 L1)
 */
inline ClaimReport certify_omp_guarantees(const Generator& generate, const OmpGuaranteeOptions& opt = {})
{
    auto rep = run_trials("omp", opt.trials, opt.seed, opt.jobs,
        [&](std::size_t, std::uint64_t seed, TrialLog& log) {
            const Instance inst = generate(seed);
            log.set_instance(instance_to_json(inst));
            const auto q = inst.as_quadratic();
            if (!q) throw ContractError("omp guarantees need a quadratic instance");
            const auto& p = *inst.partition;
            const std::size_t k = std::min(opt.k, p.t());
            ConstantsCache cc(*q, p);
            const auto oracle = brute_force_best_subset(*q, p, k, opt.cfg);
            const double l0 = q->value(vec_t::Zero(static_cast<index_t>(p.n())));
            const double gap = l0 - oracle.opt_value;
            const double tol = opt.slack * std::max(1.0, std::abs(l0));
            const double L1 = cc.at(1).L;

            const auto exact = group_omp(*q, p, k, k, opt.cfg);
            const double gamma = 1.0 - std::exp(-cc.at(2 * k).mu / L1);
            log.check("exact_k", (l0 - exact.objective) - gamma * gap + tol,
                      "improvement " + std::to_string(l0 - exact.objective) + " < gamma * gap, gamma = "
                          + std::to_string(gamma));
            log.count("gamma_sum", gamma);

            if (gap <= 0) return;
            const double eps = opt.eps_rel * gap;
            const std::size_t kp = omp_bicriteria_kprime(cc, k, p.t(), gap, eps);
            const double mu_kkp = cc.at(k + kp).mu;
            const double need = std::ceil(static_cast<double>(k) * (L1 / mu_kkp) * std::log(gap / eps));
            if (static_cast<double>(kp) < need) log.count("bicriteria_capped_at_t");
            log.count("kprime_sum", static_cast<double>(kp));
            const auto run = group_omp(*q, p, k, kp, opt.cfg);
            log.check("bicriteria", oracle.opt_value + eps + tol - run.objective,
                      "after k'=" + std::to_string(kp) + " rounds value exceeds OPT + eps");

            double prev = l0;
            for (std::size_t r = 0; r < run.trace.iterations.size(); ++r) {
                const auto& rec = run.trace.iterations[r];
                const double cur = rec.objective_after;
                const double bound = std::exp(-static_cast<double>(r + 1) / static_cast<double>(k) * mu_kkp / L1) * gap;
                log.check("stepwise", bound + tol - (cur - oracle.opt_value),
                          "round " + std::to_string(r + 1) + " above the contraction bound");
                const double need_dec = (*rec.tau) * (*rec.tau) / (2.0 * L1);
                log.check("smoothness", (prev - cur) - need_dec + tol,
                          "round " + std::to_string(r + 1) + " decrease below ||g||^2 / (2 L1)");
                prev = cur;
            }
        });
    rep.params["k"] = static_cast<double>(opt.k);
    rep.params["eps_rel"] = opt.eps_rel;
    rep.params["slack"] = opt.slack;
    return rep;
}

// ---------------------------------------------------------------------------

struct OmprGuaranteeOptions
{
    std::size_t k = 1;
    std::size_t trials = 25;
    std::uint64_t seed = 3;
    std::size_t jobs = 1;
    double eps_rel = 1e-3;
    double slack = 1e-9;
    bool random_initial = true;  // S0 uniformly at random instead of OMP's output
    SolverConfig cfg{};
};

/// Smallest k' in [k, t) with k' >= k (L2^2 / mu_{k+k'}^2 + 1), if any.
inline std::optional<std::size_t> ompr_regime_kprime(ConstantsCache& cc, std::size_t k, std::size_t t)
{
    const double L2 = cc.at(2).L;
    for (std::size_t kp = k; kp < t; ++kp) {
        const double mu = cc.at(k + kp).mu;
        if (static_cast<double>(kp) >= static_cast<double>(k) * (L2 * L2 / (mu * mu) + 1.0)) return kp;
    }
    return std::nullopt;
}

/**
 * Group OMPR on quadratics with exact constants, in the regime
 * k' >= k (L2^2 / mu_{k+k'}^2 + 1):
 *   per_round:  l(beta^(r)) - l(beta^(r+1)) >= (mu / (k L2)) (l(beta^(r)) - OPT)
 *   stepwise:   l(beta^(r)) - OPT <= exp(-(r/k) mu / L2) (l(beta^(0)) - OPT)
 *   final:      after R = ceil(k (L2/mu) log((l(0) - OPT) / eps)) rounds, value <= OPT + eps
 */
inline ClaimReport certify_ompr_guarantees(const Generator& generate, const OmprGuaranteeOptions& opt = {})
{
    auto rep = run_trials("ompr", opt.trials, opt.seed, opt.jobs,
        [&](std::size_t, std::uint64_t seed, TrialLog& log) {
            const Instance inst = generate(seed);
            log.set_instance(instance_to_json(inst));
            const auto q = inst.as_quadratic();
            if (!q) throw ContractError("ompr guarantees need a quadratic instance");
            const auto& p = *inst.partition;
            const std::size_t k = std::min(opt.k, p.t());
            ConstantsCache cc(*q, p);
            const auto kp = ompr_regime_kprime(cc, k, p.t());
            if (!kp) {
                log.fail("regime", "no k' < t satisfies k' >= k (L2^2 / mu^2 + 1)");
                return;
            }
            const double L2 = cc.at(2).L;
            const double mu = cc.at(k + *kp).mu;
            const auto oracle = brute_force_best_subset(*q, p, k, opt.cfg);
            const double l0 = q->value(vec_t::Zero(static_cast<index_t>(p.n())));
            const double gap = l0 - oracle.opt_value;
            const double tol = opt.slack * std::max(1.0, std::abs(l0));
            if (gap <= 0) return;
            const double eps = opt.eps_rel * gap;
            const auto R = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * (L2 / mu) * std::log(gap / eps)));
            log.count("kprime_sum", static_cast<double>(*kp));
            log.count("rounds_sum", static_cast<double>(R));

            OmprOptions oo;
            oo.rounds = R;
            oo.regime = true;
            if (opt.random_initial) {
                std::mt19937_64 rng(seed ^ 0x5EEDull);
                group_set_t all(p.t());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
                std::shuffle(all.begin(), all.end(), rng);
                oo.initial.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(*kp));
                std::sort(oo.initial.begin(), oo.initial.end());
            }
            const auto run = group_ompr(*q, p, k, *kp, oo, opt.cfg);
            const double start = run.trace.iterations.empty() ? run.objective
                                                              : run.trace.iterations.front().objective_before;
            for (std::size_t r = 0; r < run.trace.iterations.size(); ++r) {
                const auto& rec = run.trace.iterations[r];
                const double need = (mu / (static_cast<double>(k) * L2)) * (rec.objective_before - oracle.opt_value);
                log.check("per_round", (rec.objective_before - rec.objective_after) - need + tol,
                          "round " + std::to_string(r + 1) + " decrease below the stepwise bound");
                const double bound = std::exp(-static_cast<double>(r + 1) / static_cast<double>(k) * mu / L2)
                                     * (start - oracle.opt_value);
                log.check("stepwise", bound + tol - (rec.objective_after - oracle.opt_value),
                          "round " + std::to_string(r + 1) + " above the contraction bound");
            }
            log.check("final", oracle.opt_value + eps + tol - run.objective, "final value exceeds OPT + eps");
        });
    rep.params["k"] = static_cast<double>(opt.k);
    rep.params["eps_rel"] = opt.eps_rel;
    rep.params["random_initial"] = opt.random_initial ? 1.0 : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------

struct AttentionOptions
{
    std::size_t trials = 50;
    std::uint64_t seed = 4;
    std::size_t jobs = 1;
    std::size_t restarts = 3;
    double lambda_lo = 0.2;  // lambda drawn uniformly from [lo, hi] * tau
    double lambda_hi = 0.9;
    double mapped_tol = 1e-10;
    double value_tol = 1e-6;
    SolverConfig cfg{};
};

/**
 * Attention-factorized objective vs group LASSO (all groups penalized):
 * the start mapped from the LASSO solution reproduces the LASSO value, and
 * the best converged attention value agrees with the LASSO optimum.
 */
inline ClaimReport certify_attention_equivalence(const Generator& generate, const AttentionOptions& opt = {})
{
    auto rep = run_trials("attention", opt.trials, opt.seed, opt.jobs,
        [&](std::size_t, std::uint64_t seed, TrialLog& log) {
            const Instance inst = generate(seed);
            log.set_instance(instance_to_json(inst));
            const auto obj = inst.make_objective();
            const auto& p = *inst.partition;
            const auto tr = threshold_tau(*obj, p, group_set_t{}, opt.cfg);
            std::mt19937_64 rng(seed ^ 0xA77Eull);
            const double frac = std::uniform_real_distribution<double>(opt.lambda_lo, opt.lambda_hi)(rng);
            const double lambda = frac * tr.tau;
            if (!(lambda > 0)) {
                log.count("skipped_zero_tau");
                return;
            }
            group_set_t all(p.t());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            SolverConfig cfg = opt.cfg;
            cfg.seed = seed;
            const auto att = attention_minimize(*obj, p, all, lambda, cfg, opt.restarts);
            const double scale = 1.0 + std::abs(att.lasso_value);
            log.check("mapped_value", opt.mapped_tol * scale - std::abs(att.mapped_value - att.lasso_value),
                      "mapped start value differs from the LASSO value");
            log.check("best_value", opt.value_tol * scale - std::abs(att.value - att.lasso_value),
                      "best attention value differs from the LASSO optimum");
            if (att.best_start != 0) log.count("random_start_won");
        });
    rep.params["restarts"] = static_cast<double>(opt.restarts);
    rep.params["mapped_tol"] = opt.mapped_tol;
    rep.params["value_tol"] = opt.value_tol;
    return rep;
}

inline io::json report_to_json(const ClaimReport& r)
{
    io::json checks = io::json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name}, {"count", c.count}, {"passes", c.passes},
                          {"worst_slack", std::isfinite(c.worst_slack) ? io::json(io::round12(c.worst_slack)) : io::json(nullptr)}});
    }
    io::json failures = io::json::array();
    for (const auto& f : r.failures) {
        failures.push_back({{"trial", f.trial}, {"seed", f.seed}, {"check", f.check}, {"detail", f.detail},
                            {"instance", f.instance}});
    }
    io::json params = io::json::object();
    for (const auto& [k, v] : r.params) params[k] = io::round12(v);
    io::json counters = io::json::object();
    for (const auto& [k, v] : r.counters) counters[k] = io::round12(v);
    return {{"claim", r.claim},
            {"instances", r.instances},
            {"passes", r.passes},
            {"all_passed", r.all_passed()},
            {"worst_slack", std::isfinite(r.worst_slack) ? io::json(io::round12(r.worst_slack)) : io::json(nullptr)},
            {"params", params},
            {"counters", counters},
            {"checks", checks},
            {"failures", failures}};
}

} // namespace verify
} // namespace groupsparse
