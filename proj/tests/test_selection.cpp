#include <gtest/gtest.h>
#include "support.hpp"

using namespace groupsparse;
using support::all_groups;

namespace {

QuadraticObjective isotropic(const vec_t& b) { return QuadraticObjective(2.0 * mat_t::Identity(b.size(), b.size()), b, 0); }

vec_t vec(std::initializer_list<double> xs)
{
    vec_t v(static_cast<index_t>(xs.size()));
    index_t i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

} // namespace

TEST(Threshold, DiagonalQuadraticAtEmptySelection)
{
    const auto q = isotropic(vec({-1.0, 3.0, -3.0, 0.5}));
    const auto p = GroupPartition::singletons(4);
    const auto rep = threshold_tau(q, p, group_set_t{});
    EXPECT_DOUBLE_EQ(rep.tau, 3.0);
    EXPECT_EQ(rep.argmax_set, (group_set_t{1, 2}));
    EXPECT_EQ(rep.beta_inf, vec_t::Zero(4));
    const group_set_t sel{1};
    const auto rep1 = threshold_tau(q, p, sel);
    EXPECT_DOUBLE_EQ(rep1.tau, 3.0);
    EXPECT_EQ(rep1.argmax_set, (group_set_t{2}));
    EXPECT_NEAR(rep1.group_grad_norms[1], 0.0, 1e-14);
    EXPECT_THROW(threshold_tau(q, p, all_groups(p)), ContractError);
}

TEST(Threshold, TauIsTheSmallestLambdaWithEmptySupport)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = gen::ridge_least_squares(seed);
        const auto obj = inst.make_objective();
        const auto& p = *inst.partition;
        const group_set_t sel{0};
        const auto rep = threshold_tau(*obj, p, sel);
        const auto pen = p.complement(sel);
        const auto above = lasso_select_at(*obj, p, sel, rep.tau * (1 + 1e-6));
        EXPECT_TRUE(above.active.empty());
        const auto below = lasso_select_at(*obj, p, sel, rep.tau * 0.9);
        EXPECT_FALSE(below.active.empty());
    }
}

TEST(BruteForce, DiagonalQuadraticPicksLargestSeparableDecrease)
{
    // decrease of coordinate j alone is b_j^2 / (2 a_j)
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const vec_t a = (support::random_vector(rng, 7).array().abs() + 0.5).matrix();
        const vec_t b = support::random_vector(rng, 7);
        const auto q = support::diagonal_quadratic(a, b);
        const auto p = GroupPartition::singletons(7);
        std::vector<std::pair<double, std::size_t>> dec;
        for (std::size_t j = 0; j < 7; ++j) dec.push_back({b[j] * b[j] / (2 * a[j]), j});
        std::sort(dec.rbegin(), dec.rend());
        for (std::size_t k = 0; k <= 7; ++k) {
            const auto oracle = verify::brute_force_best_subset(q, p, k);
            group_set_t expect;
            double total = 0;
            for (std::size_t j = 0; j < k; ++j) {
                expect.push_back(dec[j].second);
                total += dec[j].first;
            }
            std::sort(expect.begin(), expect.end());
            EXPECT_EQ(oracle.best_support, expect);
            EXPECT_NEAR(oracle.opt_value, -total, 1e-12 * (1 + total));
        }
    }
}

TEST(Omp, IsotropicMatchesBruteForce)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = gen::random_partition(rng, 10, 5);
        const auto q = isotropic(support::random_vector(rng, 10));
        for (std::size_t k = 0; k <= 5; ++k) {
            const auto res = group_omp(q, p, k, k);
            const auto oracle = verify::brute_force_best_subset(q, p, k);
            EXPECT_NEAR(res.objective, oracle.opt_value, 1e-12 * (1 + std::abs(oracle.opt_value)));
        }
    }
}

TEST(Omp, ZeroAndFullSparsity)
{
    const auto inst = gen::ridge_least_squares(6);
    const auto obj = inst.make_objective();
    const auto& p = *inst.partition;
    const auto none = group_omp(*obj, p, 0, 0);
    EXPECT_TRUE(none.selected.empty());
    EXPECT_DOUBLE_EQ(none.objective, obj->value(vec_t::Zero(p.n())));
    const auto full = group_omp(*obj, p, p.t(), p.t());
    const auto unrestricted = restricted_minimize(*obj, p, all_groups(p));
    EXPECT_NEAR(full.objective, obj->value(unrestricted.values), 1e-10 * (1 + std::abs(full.objective)));
    EXPECT_THROW(group_omp(*obj, p, 1, p.t() + 1), ContractError);
}

TEST(Omp, RoundsPickLargestGradientAndDecrease)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = seed % 2 ? gen::ridge_logistic(seed) : gen::ridge_least_squares(seed);
        const auto obj = inst.make_objective();
        const auto& p = *inst.partition;
        const auto res = group_omp(*obj, p, 3, std::min<std::size_t>(3, p.t()));
        double prev = obj->value(vec_t::Zero(p.n()));
        for (const auto& rec : res.trace.iterations) {
            EXPECT_DOUBLE_EQ(rec.group_grad_norms[*rec.selected], *rec.tau);
            EXPECT_NEAR(rec.objective_before, prev, 1e-12 * (1 + std::abs(prev)));
            EXPECT_LT(rec.objective_after, rec.objective_before);
            prev = rec.objective_after;
        }
    }
}

TEST(Omp, StopsEarlyAtUnrestrictedOptimum)
{
    // b lives on group 0 only and A is block diagonal: after one pick the gradient vanishes
    const auto q = isotropic(vec({1.0, -2.0, 0.0, 0.0}));
    const GroupPartition p(4, {{0, 1}, {2}, {3}});
    const auto res = group_omp(q, p, 3, 3);
    EXPECT_EQ(res.selected, (group_set_t{0}));
    EXPECT_TRUE(res.trace.stopped_early);
}

TEST(Ompr, ZeroRoundsReturnsInitialSet)
{
    const auto inst = gen::random_quadratic(3, 12, 6);
    const auto obj = inst.make_objective();
    const auto& p = *inst.partition;
    OmprOptions opt;
    opt.initial = {1, 4};
    const auto res = group_ompr(*obj, p, 1, 2, opt);
    EXPECT_EQ(res.selected, opt.initial);
    EXPECT_TRUE(res.trace.iterations.empty());
    EXPECT_NEAR(res.objective, obj->value(restricted_minimize(*obj, p, opt.initial).values), 1e-12);
    opt.initial = {1};
    EXPECT_THROW(group_ompr(*obj, p, 1, 2, opt), ContractError);
    opt.initial = {1, 1};
    EXPECT_THROW(group_ompr(*obj, p, 1, 2, opt), ContractError);
}

TEST(Ompr, SwapsAndReturnsBestVisitedSet)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = gen::random_quadratic(seed, 12, 6);
        const auto obj = inst.make_objective();
        const auto& p = *inst.partition;
        OmprOptions opt;
        opt.initial = {0, 1, 2};
        opt.rounds = 6;
        const auto res = group_ompr(*obj, p, 2, 3, opt);
        double best = obj->value(restricted_minimize(*obj, p, opt.initial).values);
        for (const auto& rec : res.trace.iterations) {
            if (rec.fixed_point) continue;
            ASSERT_TRUE(rec.selected && rec.removed);
            EXPECT_NE(*rec.selected, *rec.removed);
            best = std::min(best, rec.objective_after);
        }
        EXPECT_DOUBLE_EQ(res.objective, best);
        EXPECT_EQ(res.selected.size(), 3u);
    }
}

TEST(Ompr, FixedPointWhenSupportIsOptimal)
{
    const auto q = isotropic(vec({1.0, -2.0, 0.0, 0.0}));
    const GroupPartition p(4, {{0, 1}, {2}, {3}});
    OmprOptions opt;
    opt.initial = {0};
    opt.rounds = 5;
    const auto res = group_ompr(q, p, 1, 1, opt);
    ASSERT_EQ(res.trace.iterations.size(), 1u);
    EXPECT_TRUE(res.trace.iterations[0].fixed_point);
    EXPECT_EQ(res.selected, (group_set_t{0}));
}

TEST(Sequential, TiedGroupsSelectFromArgmaxSet)
{
    const auto q = isotropic(vec({-1.0, -1.0, -0.5}));
    const auto p = GroupPartition::singletons(3);
    const auto rep = threshold_tau(q, p, group_set_t{});
    EXPECT_EQ(rep.argmax_set, (group_set_t{0, 1}));
    for (const auto& res : {sequential_lasso(q, p, 1), sequential_attention(q, p, 1)}) {
        ASSERT_EQ(res.selected.size(), 1u);
        EXPECT_TRUE(res.selected[0] == 0 || res.selected[0] == 1);
        EXPECT_TRUE(*res.trace.iterations[0].in_argmax_set);
    }
}

TEST(Sequential, LassoAndAttentionAgreeWithOmp)
{
    // without ties, one sequential round picks the argmax of the gradient norms, as OMP does
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = seed % 3 == 0 ? gen::ridge_logistic(seed) : gen::ridge_least_squares(seed);
        const auto obj = inst.make_objective();
        const auto& p = *inst.partition;
        const std::size_t kp = std::min<std::size_t>(3, p.t());
        const auto omp = group_omp(*obj, p, kp, kp);
        const auto lasso = sequential_lasso(*obj, p, kp);
        EXPECT_EQ(lasso.selected, omp.selected) << "seed " << seed;
        for (const auto& rec : lasso.trace.iterations) EXPECT_TRUE(*rec.in_argmax_set);
        if (seed < 10) {
            const auto att = sequential_attention(*obj, p, kp);
            EXPECT_EQ(att.selected, omp.selected) << "seed " << seed;
        }
    }
}

TEST(Sequential, NothingToSelectStopsEarly)
{
    const auto q = isotropic(vec_t::Zero(3));
    const auto p = GroupPartition::singletons(3);
    const auto res = sequential_lasso(q, p, 2);
    EXPECT_TRUE(res.selected.empty());
    EXPECT_TRUE(res.trace.stopped_early);
}

TEST(Sequential, Preconditions)
{
    const auto q = isotropic(vec({1.0, 2.0}));
    const auto p = GroupPartition::singletons(2);
    EXPECT_THROW(sequential_lasso(q, p, 3), ContractError);
    SequentialOptions opt;
    opt.delta = 1.5;
    EXPECT_THROW(sequential_lasso(q, p, 1, {}, opt), ContractError);
    opt.delta = 0;
    EXPECT_THROW(sequential_attention(q, p, 1, {}, opt), ContractError);
}

TEST(Sequential, InnerSolverFailureSurfaces)
{
    const auto inst = gen::ridge_least_squares(2);
    const auto obj = inst.make_objective();
    SolverConfig cfg;
    cfg.max_iters = 1;
    EXPECT_THROW(sequential_lasso(*obj, *inst.partition, 2, cfg), SolverError);
}
