#pragma once
#include <random>
#include <groupsparse/groupsparse.hpp>

namespace groupsparse {
namespace support {

inline vec_t random_vector(std::mt19937_64& rng, std::size_t n, double sd = 1.0)
{
    std::normal_distribution<double> normal(0.0, sd);
    vec_t v(static_cast<index_t>(n));
    for (auto& x : v) x = normal(rng);
    return v;
}

/// Central differences, step scaled per coordinate.
inline vec_t finite_difference_gradient(const Objective& obj, const vec_t& x)
{
    vec_t g(x.size());
    for (index_t j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x[j]));
        vec_t a = x, b = x;
        a[j] += h;
        b[j] -= h;
        g[j] = (obj.value(a) - obj.value(b)) / (2.0 * h);
    }
    return g;
}

/// Largest relative error of the analytic gradient against central differences.
inline double gradient_error(const Objective& obj, const vec_t& x)
{
    const vec_t fd = finite_difference_gradient(obj, x);
    const vec_t g = obj.gradient(x);
    return (g - fd).norm() / (1.0 + fd.norm());
}

inline group_set_t all_groups(const GroupPartition& p)
{
    group_set_t all(p.t());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

/// Separable quadratic sum_j (a_j / 2) x_j^2 + b_j x_j with singleton groups.
inline QuadraticObjective diagonal_quadratic(const vec_t& a, const vec_t& b)
{
    return QuadraticObjective(a.asDiagonal().toDenseMatrix(), b, 0.0, true);
}

// Minimizes 1/2 ||x - v||^2 + kappa ||x|| over R^2 by nested grid search.
inline vec_t prox_grid_oracle(const vec_t& v, double kappa)
{
    auto h = [&](double a, double b) {
        vec_t x(2);
        x << a, b;
        return 0.5 * (x - v).squaredNorm() + kappa * x.norm();
    };
    double ca = 0, cb = 0, width = v.norm() + 1.0;
    for (int level = 0; level < 4; ++level) {
        const int steps = 200;
        double best = std::numeric_limits<double>::infinity(), ba = ca, bb = cb;
        for (int i = -steps; i <= steps; ++i) {
            for (int j = -steps; j <= steps; ++j) {
                const double a = ca + width * i / steps, b = cb + width * j / steps;
                const double val = h(a, b);
                if (val < best) {
                    best = val;
                    ba = a;
                    bb = b;
                }
            }
        }
        ca = ba;
        cb = bb;
        width *= 4.0 / steps;
    }
    vec_t out(2);
    out << ca, cb;
    return out;
}

} // namespace support
} // namespace groupsparse
