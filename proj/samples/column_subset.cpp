#include <iostream>
#include <groupsparse/groupsparse.hpp>

namespace gs = groupsparse;

int main()
{
    // 40 x 8 matrix whose last four columns are mixtures of the first four
    std::mt19937_64 rng(3);
    gs::css::CssInstance inst;
    inst.X = gs::gen::gaussian(rng, 40, 8);
    const gs::mat_t mix = gs::gen::gaussian(rng, 4, 4);
    inst.X.rightCols(4) = inst.X.leftCols(4) * mix + 0.05 * gs::gen::gaussian(rng, 40, 4);
    inst.ridge = 1e-6;
    inst.k = 4;

    for (auto algo : {gs::css::Algorithm::omp, gs::css::Algorithm::seq_lasso}) {
        const auto res = gs::css::css_select(inst, algo, 4);
        std::cout << (algo == gs::css::Algorithm::omp ? "omp      " : "seq-lasso") << " columns: ";
        for (auto c : res.columns) std::cout << c << ' ';
        std::cout << " residual " << gs::css::projection_residual(inst.X, res.columns) << " of "
                  << inst.X.squaredNorm() << '\n';
    }
}
