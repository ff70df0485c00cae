#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>
#include <Eigen/Dense>

namespace groupsparse {

using vec_t = Eigen::VectorXd;
using mat_t = Eigen::MatrixXd;
using index_t = Eigen::Index;
using group_set_t = std::vector<std::size_t>;

/**
 * Raised when a caller violates a documented precondition
 * (dimension mismatch, invalid partition, out-of-range parameter).
 */
class ContractError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Disjoint groups T_0, ..., T_{t-1} covering the coordinates {0, ..., n-1}.
 * Each group is stored as a sorted list of coordinate indices.
 * Immutable once constructed.
 */
class GroupPartition
{
public:
    GroupPartition(std::size_t n, std::vector<std::vector<std::size_t>> groups)
        : n_(n), groups_(std::move(groups))
    {
        if (groups_.empty() && n_ > 0) {
            throw ContractError("partition: no groups given for n > 0");
        }
        if (groups_.size() > n_) {
            throw ContractError("partition: more groups than coordinates");
        }
        std::vector<int> owner(n_, -1);
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            auto& grp = groups_[g];
            if (grp.empty()) {
                throw ContractError("partition: group " + std::to_string(g) + " is empty");
            }
            std::sort(grp.begin(), grp.end());
            for (auto j : grp) {
                if (j >= n_) {
                    throw ContractError("partition: coordinate " + std::to_string(j) + " out of range");
                }
                if (owner[j] != -1) {
                    throw ContractError("partition: coordinate " + std::to_string(j)
                                        + " appears in more than one group");
                }
                owner[j] = static_cast<int>(g);
            }
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if (owner[j] == -1) {
                throw ContractError("partition: coordinate " + std::to_string(j) + " not covered");
            }
        }
        group_of_.assign(owner.begin(), owner.end());
    }

    /// Every coordinate in its own group.
    static GroupPartition singletons(std::size_t n)
    {
        std::vector<std::vector<std::size_t>> g(n);
        for (std::size_t j = 0; j < n; ++j) g[j] = {j};
        return GroupPartition(n, std::move(g));
    }

    /// Consecutive blocks with the given sizes.
    static GroupPartition contiguous(std::span<const std::size_t> sizes)
    {
        std::vector<std::vector<std::size_t>> g;
        std::size_t begin = 0;
        for (auto s : sizes) {
            std::vector<std::size_t> grp(s);
            for (std::size_t j = 0; j < s; ++j) grp[j] = begin + j;
            begin += s;
            g.push_back(std::move(grp));
        }
        return GroupPartition(begin, std::move(g));
    }

    std::size_t n() const { return n_; }
    std::size_t t() const { return groups_.size(); }
    const std::vector<std::size_t>& group(std::size_t i) const { return groups_.at(i); }
    const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
    std::size_t group_of(std::size_t coord) const { return group_of_.at(coord); }

    /// Sorted coordinate list of the union of the given groups.
    std::vector<std::size_t> coordinates(std::span<const std::size_t> group_ids) const
    {
        std::vector<std::size_t> out;
        for (auto i : group_ids) {
            const auto& g = group(i);
            out.insert(out.end(), g.begin(), g.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Groups not in `selected`, ascending.
    group_set_t complement(std::span<const std::size_t> selected) const
    {
        std::vector<char> in(t(), 0);
        for (auto i : selected) in.at(i) = 1;
        group_set_t out;
        for (std::size_t i = 0; i < t(); ++i) if (!in[i]) out.push_back(i);
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::size_t> group_of_;
};

inline void check_dim(const vec_t& v, std::size_t n, const char* what)
{
    if (static_cast<std::size_t>(v.size()) != n) {
        throw ContractError(std::string(what) + ": expected length " + std::to_string(n)
                            + ", got " + std::to_string(v.size()));
    }
}

inline vec_t restrict_to(const vec_t& v, const std::vector<std::size_t>& coords)
{
    vec_t out(static_cast<index_t>(coords.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) out[j] = v[coords[j]];
    return out;
}

inline double group_norm(const vec_t& v, const std::vector<std::size_t>& grp)
{
    double s = 0;
    for (auto j : grp) s += v[j] * v[j];
    return std::sqrt(s);
}

/// Euclidean norm of g restricted to each group.
inline vec_t group_norms(const vec_t& g, const GroupPartition& p)
{
    check_dim(g, p.n(), "group_norms");
    vec_t out(static_cast<index_t>(p.t()));
    for (std::size_t i = 0; i < p.t(); ++i) out[i] = group_norm(g, p.group(i));
    return out;
}

/// A point in R^n together with the partition that gives it group structure.
/// The partition is not owned and must outlive the coefficients.
struct Coefficients
{
    vec_t values;
    const GroupPartition* partition = nullptr;

    Coefficients(vec_t v, const GroupPartition& p)
        : values(std::move(v)), partition(&p)
    {
        check_dim(values, partition->n(), "coefficients");
    }

    vec_t group_norms() const { return groupsparse::group_norms(values, *partition); }
};

/// Detection threshold used to decide whether a group is numerically nonzero.
inline double default_detection_threshold(const vec_t& beta)
{
    return 1e-7 * (1.0 + beta.norm());
}

/// {i : ||beta|T_i||_2 > eta}, ascending.
inline group_set_t group_support(const vec_t& beta, const GroupPartition& p, double eta)
{
    if (eta < 0) throw ContractError("group_support: eta must be >= 0");
    check_dim(beta, p.n(), "group_support");
    group_set_t out;
    for (std::size_t i = 0; i < p.t(); ++i) {
        if (group_norm(beta, p.group(i)) > eta) out.push_back(i);
    }
    return out;
}

inline group_set_t group_support(const Coefficients& beta, double eta)
{
    return group_support(beta.values, *beta.partition, eta);
}

/**
 * A smooth objective l: R^n -> R.
 *
 * Implementations that are quadratic (or otherwise admit an exact
 * restricted minimizer) override exact_restricted_minimizer(); the
 * solvers use that path instead of iterating.
 */
class Objective
{
public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(const vec_t& beta) const = 0;
    virtual vec_t gradient(const vec_t& beta) const = 0;
    virtual bool strictly_convex() const { return true; }

    /// Value and gradient in one pass; override when sharing work is cheaper.
    virtual double value_and_gradient(const vec_t& beta, vec_t& grad) const
    {
        grad = gradient(beta);
        return value(beta);
    }

    /**
     * Minimizer of l over {beta : beta_j = 0 for j not in coords}, if it can
     * be computed directly. `coords` is sorted. Returns std::nullopt when no
     * direct method is available.
     */
    virtual std::optional<vec_t> exact_restricted_minimizer(const std::vector<std::size_t>& coords) const
    {
        (void)coords;
        return std::nullopt;
    }
};

/// Number of s-subsets of a t-set, saturating at a large sentinel.
inline double binomial(std::size_t t, std::size_t s)
{
    if (s > t) return 0;
    double r = 1;
    for (std::size_t j = 1; j <= s; ++j) r = r * static_cast<double>(t - s + j) / static_cast<double>(j);
    return std::round(r);
}

/**
 * Calls f(const group_set_t&) for every s-subset of {0, ..., t-1} in
 * lexicographic order. Stops early if f returns false.
 */
template <class F>
void for_each_subset(std::size_t t, std::size_t s, F&& f)
{
    if (s > t) return;
    group_set_t idx(s);
    for (std::size_t j = 0; j < s; ++j) idx[j] = j;
    while (true) {
        if constexpr (std::is_same_v<std::invoke_result_t<F&, const group_set_t&>, bool>) {
            if (!f(static_cast<const group_set_t&>(idx))) return;
        } else {
            f(static_cast<const group_set_t&>(idx));
        }
        if (s == 0) return;
        std::size_t j = s;
        while (j > 0 && idx[j - 1] == t - s + (j - 1)) --j;
        if (j == 0) return;
        ++idx[j - 1];
        for (std::size_t q = j; q < s; ++q) idx[q] = idx[q - 1] + 1;
    }
}

/// One round of a selection algorithm.
struct TraceRecord
{
    std::size_t round = 0;
    std::optional<std::size_t> selected;
    std::optional<std::size_t> removed;
    std::optional<double> tau;
    std::optional<double> lambda;
    vec_t group_grad_norms;
    double objective_before = 0;
    double objective_after = 0;
    // Sequential LASSO / attention only: whether the pick lies in the argmax set.
    std::optional<bool> in_argmax_set;
    std::size_t delta_retries = 0;
    bool fixed_point = false;
    std::string note;
};

struct SelectionTrace
{
    std::string algorithm;
    std::vector<TraceRecord> iterations;
    bool stopped_early = false;
    // OMPR only: whether k' met the guarantee regime supplied by the caller.
    std::optional<bool> ompr_regime;
};

} // namespace groupsparse
