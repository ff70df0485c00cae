#include <iostream>
#include <groupsparse/groupsparse.hpp>

namespace gs = groupsparse;

int main()
{
    // 60 samples, 12 features in 4 groups of 3; the response depends on groups 1 and 3
    std::mt19937_64 rng(7);
    const gs::mat_t X = gs::gen::gaussian(rng, 60, 12, 1.0 / std::sqrt(60.0));
    gs::vec_t truth = gs::vec_t::Zero(12);
    truth.segment(3, 3) << 1.0, -2.0, 0.5;
    truth.segment(9, 3) << -1.5, 1.0, 1.0;
    const gs::vec_t y = X * truth;

    const std::vector<std::size_t> sizes{3, 3, 3, 3};
    const auto partition = gs::GroupPartition::contiguous(sizes);
    const auto objective = gs::least_squares(X, y, 1e-3);

    const auto omp = gs::group_omp(objective, partition, 2, 2);
    const auto lasso = gs::sequential_lasso(objective, partition, 2);

    std::cout << "OMP selects:            ";
    for (auto i : omp.selected) std::cout << i << ' ';
    std::cout << "(loss " << omp.objective << ")\n";
    std::cout << "sequential LASSO picks: ";
    for (auto i : lasso.selected) std::cout << i << ' ';
    std::cout << "(loss " << lasso.objective << ")\n";

    for (const auto& rec : lasso.trace.iterations) {
        std::cout << "  round " << rec.round << ": tau = " << *rec.tau << ", lambda = " << *rec.lambda
                  << ", pick in argmax set: " << std::boolalpha << *rec.in_argmax_set << '\n';
    }
}
