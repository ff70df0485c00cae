#pragma once
#include <memory>
#include <random>
#include <groupsparse/css.hpp>
#include <groupsparse/io.hpp>
#include <groupsparse/objectives.hpp>

namespace groupsparse {

/**
 * A serializable problem instance: an objective description plus its
 * partition. Kinds:
 *   "least_squares"  ||X beta - y||^2 + ridge ||beta||^2
 *   "quadratic"      1/2 beta^T A beta + b^T beta + c
 *   "logistic"       sum log(1 + exp(-y_i x_i^T beta)) + ridge ||beta||^2
 *   "css"            column subset selection on X (partition = rows of V)
 */
struct Instance
{
    std::string kind;
    mat_t X;
    vec_t y;
    double ridge = 0;
    mat_t A;
    vec_t b;
    double c = 0;
    css::Loss loss = css::Loss::frobenius;
    double huber_delta = 1.0;
    std::size_t k = 1;
    std::shared_ptr<const GroupPartition> partition;

    std::unique_ptr<Objective> make_objective() const
    {
        if (kind == "least_squares") return std::make_unique<QuadraticObjective>(least_squares(X, y, ridge));
        if (kind == "quadratic") return std::make_unique<QuadraticObjective>(A, b, c, true);
        if (kind == "logistic") return std::make_unique<RidgeLogisticObjective>(X, y, ridge);
        if (kind == "css") return std::make_unique<css::CssObjective>(css_instance());
        throw ContractError("instance: unknown kind '" + kind + "'");
    }

    css::CssInstance css_instance() const { return css::CssInstance{X, loss, huber_delta, ridge, k}; }

    /// The objective as a quadratic, when it is one (for exact RSC constants).
    std::optional<QuadraticObjective> as_quadratic() const
    {
        if (kind == "least_squares") return least_squares(X, y, ridge);
        if (kind == "quadratic") return QuadraticObjective(A, b, c, true);
        if (kind == "css" && loss == css::Loss::frobenius) return css::css_quadratic(css_instance());
        return std::nullopt;
    }
};

inline io::json instance_to_json(const Instance& inst)
{
    io::json j{{"kind", inst.kind}};
    if (inst.kind == "quadratic") {
        j["A"] = io::matrix_to_json(inst.A);
        j["b"] = io::vector_to_json(inst.b);
        j["c"] = inst.c;
    } else {
        j["X"] = io::matrix_to_json(inst.X);
        j["ridge"] = inst.ridge;
    }
    if (inst.kind == "least_squares" || inst.kind == "logistic") j["y"] = io::vector_to_json(inst.y);
    if (inst.kind == "css") {
        j["loss"] = css::to_string(inst.loss);
        j["huber_delta"] = inst.huber_delta;
        j["k"] = inst.k;
    } else {
        j["partition"] = io::partition_to_json(*inst.partition);
    }
    return j;
}

/// Parses and validates an instance; throws io::InputError or ContractError on bad input.
inline Instance instance_from_json(const io::json& j)
{
    try {
        Instance inst;
        inst.kind = j.at("kind").get<std::string>();
        if (inst.kind == "quadratic") {
            inst.A = io::matrix_from_json(j.at("A"));
            inst.b = io::vector_from_json(j.at("b"));
            inst.c = j.value("c", 0.0);
        } else if (inst.kind == "least_squares" || inst.kind == "logistic" || inst.kind == "css") {
            inst.X = io::matrix_from_json(j.at("X"));
            inst.ridge = j.value("ridge", 0.0);
            if (inst.kind != "css") inst.y = io::vector_from_json(j.at("y"));
        } else {
            throw io::InputError("instance: unknown kind '" + inst.kind + "'");
        }
        if (inst.kind == "css") {
            inst.loss = css::parse_loss(j.value("loss", std::string("frobenius")));
            inst.huber_delta = j.value("huber_delta", 1.0);
            inst.k = j.value("k", std::size_t{1});
            inst.partition = std::make_shared<const GroupPartition>(
                css::css_partition(static_cast<std::size_t>(inst.X.cols())));
        } else {
            inst.partition = std::make_shared<const GroupPartition>(io::partition_from_json(j.at("partition")));
        }
        // constructing the objective validates dimensions and convexity
        const auto obj = inst.make_objective();
        if (obj->dim() != inst.partition->n()) {
            throw ContractError("instance: partition size does not match the objective dimension");
        }
        return inst;
    } catch (const io::json::exception& e) {
        throw io::InputError(std::string("instance: ") + e.what());
    }
}

inline Instance load_instance(const std::string& path) { return instance_from_json(io::read_json(path)); }

// ---------------------------------------------------------------------------
// Seeded generators. All draws come from std::mt19937_64 seeded with the
// given seed; standard-library distributions make streams reproducible for
// a fixed toolchain.

namespace gen {

/// n coordinates split into t nonempty groups with random sizes and a random coordinate assignment.
inline GroupPartition random_partition(std::mt19937_64& rng, std::size_t n, std::size_t t)
{
    if (t == 0 || t > n) throw ContractError("random_partition: need 1 <= t <= n");
    std::vector<std::size_t> cuts(n - 1);
    for (std::size_t j = 0; j < cuts.size(); ++j) cuts[j] = j + 1;
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(t - 1);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n; ++j) perm[j] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> groups(t);
    std::size_t g = 0;
    for (std::size_t j = 0; j < n; ++j) {
        while (g < cuts.size() && j >= cuts[g]) ++g;
        groups[g].push_back(perm[j]);
    }
    return GroupPartition(n, std::move(groups));
}

inline mat_t gaussian(std::mt19937_64& rng, index_t rows, index_t cols, double sd = 1.0)
{
    std::normal_distribution<double> normal(0.0, sd);
    mat_t M(rows, cols);
    for (index_t c = 0; c < cols; ++c)
        for (index_t r = 0; r < rows; ++r) M(r, c) = normal(rng);
    return M;
}

inline std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct Shape
{
    std::size_t t_min = 3, t_max = 10;
    std::size_t n_max = 40;
    std::size_t m_max = 60;
};

/**
 * Ridge least squares. t ~ U{t_min..t_max}, n ~ U{t..min(n_max, 4t)},
 * m ~ U{max(n/2, 5)..m_max}; X has N(0, 1/m) entries; y = X beta0 + 0.1 N(0,1)
 * with beta0 ~ N(0,1) on two random groups; ridge ~ U(0.01, 0.1).
 */
inline Instance ridge_least_squares(std::uint64_t seed, const Shape& shape = {})
{
    std::mt19937_64 rng(seed);
    const std::size_t t = uniform_int(rng, shape.t_min, shape.t_max);
    const std::size_t n = uniform_int(rng, t, std::min(shape.n_max, 4 * t));
    const std::size_t m = uniform_int(rng, std::min(shape.m_max, std::max<std::size_t>(n / 2, 5)), shape.m_max);
    Instance inst;
    inst.kind = "least_squares";
    inst.partition = std::make_shared<const GroupPartition>(random_partition(rng, n, t));
    inst.X = gaussian(rng, static_cast<index_t>(m), static_cast<index_t>(n), 1.0 / std::sqrt(double(m)));
    vec_t beta0 = vec_t::Zero(static_cast<index_t>(n));
    std::normal_distribution<double> normal;
    for (int q = 0; q < 2; ++q)
        for (auto j : inst.partition->group(uniform_int(rng, 0, t - 1))) beta0[j] = normal(rng);
    inst.y = inst.X * beta0;
    for (auto& v : inst.y) v += 0.1 * normal(rng);
    inst.ridge = std::uniform_real_distribution<double>(0.01, 0.1)(rng);
    return inst;
}

/**
 * Ridge logistic regression. t ~ U{t_min..t_max}, n ~ U{t..min(n_max, 3t)},
 * m ~ U{20..m_max}; X ~ N(0,1); labels sign(X beta0 + N(0,1)) with beta0
 * ~ N(0,1) on two random groups; ridge ~ U(0.05, 0.5).
 */
inline Instance ridge_logistic(std::uint64_t seed, const Shape& shape = {})
{
    std::mt19937_64 rng(seed);
    const std::size_t t = uniform_int(rng, shape.t_min, shape.t_max);
    const std::size_t n = uniform_int(rng, t, std::min(shape.n_max, 3 * t));
    const std::size_t m = uniform_int(rng, std::min<std::size_t>(20, shape.m_max), shape.m_max);
    Instance inst;
    inst.kind = "logistic";
    inst.partition = std::make_shared<const GroupPartition>(random_partition(rng, n, t));
    inst.X = gaussian(rng, static_cast<index_t>(m), static_cast<index_t>(n));
    vec_t beta0 = vec_t::Zero(static_cast<index_t>(n));
    std::normal_distribution<double> normal;
    for (int q = 0; q < 2; ++q)
        for (auto j : inst.partition->group(uniform_int(rng, 0, t - 1))) beta0[j] = normal(rng);
    const vec_t score = inst.X * beta0;
    inst.y.resize(static_cast<index_t>(m));
    for (index_t i = 0; i < inst.y.size(); ++i) inst.y[i] = score[i] + normal(rng) >= 0 ? 1.0 : -1.0;
    inst.ridge = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
    return inst;
}

/**
 * Quadratic with Hessian A = 2 (I + spread * sym(G)) for G ~ N(0, 1/n),
 * rescaled so the spectrum lies in [2 (1 - spread), 2 (1 + spread)];
 * b ~ N(0, 4), c = 0. spread = 0 gives the isotropic case A = 2I.
 */
inline Instance conditioned_quadratic(std::uint64_t seed, std::size_t n, std::size_t t, double spread)
{
    if (!(spread >= 0 && spread < 1)) throw ContractError("conditioned_quadratic: spread must be in [0,1)");
    std::mt19937_64 rng(seed);
    Instance inst;
    inst.kind = "quadratic";
    inst.partition = std::make_shared<const GroupPartition>(random_partition(rng, n, t));
    const auto nn = static_cast<index_t>(n);
    mat_t G = gaussian(rng, nn, nn);
    mat_t S = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<mat_t> es(S, Eigen::EigenvaluesOnly);
    const double radius = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(nn - 1)));
    if (radius > 0) S /= radius;
    inst.A = 2.0 * (mat_t::Identity(nn, nn) + spread * S);
    inst.A = 0.5 * (inst.A + inst.A.transpose());
    inst.b = 2.0 * gaussian(rng, nn, 1).col(0);
    inst.c = 0;
    return inst;
}

/// Random PD quadratic: A = 2 (M^T M / m + ridge I) for Gaussian M (m = n + 2), b ~ N(0,1).
inline Instance random_quadratic(std::uint64_t seed, std::size_t n, std::size_t t, double ridge = 0.05)
{
    std::mt19937_64 rng(seed);
    Instance inst;
    inst.kind = "quadratic";
    inst.partition = std::make_shared<const GroupPartition>(random_partition(rng, n, t));
    const auto nn = static_cast<index_t>(n);
    const mat_t M = gaussian(rng, nn + 2, nn);
    inst.A = 2.0 * (M.transpose() * M / double(nn + 2) + ridge * mat_t::Identity(nn, nn));
    inst.A = 0.5 * (inst.A + inst.A.transpose());
    inst.b = gaussian(rng, nn, 1).col(0);
    inst.c = 0;
    return inst;
}

/// CSS matrix with N(0,1) entries.
inline Instance css_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols, css::Loss loss = css::Loss::frobenius,
                           double ridge = 0, double huber_delta = 1.0, std::size_t k = 2)
{
    std::mt19937_64 rng(seed);
    Instance inst;
    inst.kind = "css";
    inst.X = gaussian(rng, static_cast<index_t>(rows), static_cast<index_t>(cols));
    inst.loss = loss;
    inst.ridge = ridge;
    inst.huber_delta = huber_delta;
    inst.k = k;
    inst.partition = std::make_shared<const GroupPartition>(css::css_partition(cols));
    return inst;
}

} // namespace gen
} // namespace groupsparse
