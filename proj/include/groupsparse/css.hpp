#pragma once
#include <string>
#include <groupsparse/selection.hpp>

namespace groupsparse {
namespace css {

enum class Loss { frobenius, pseudo_huber };

inline Loss parse_loss(const std::string& s)
{
    if (s == "frobenius" || s == "frobenius-ridge" || s == "frobenius+ridge") return Loss::frobenius;
    if (s == "pseudo-huber" || s == "pseudo_huber") return Loss::pseudo_huber;
    throw ContractError("css: unknown loss '" + s + "'");
}

inline std::string to_string(Loss l) { return l == Loss::frobenius ? "frobenius" : "pseudo-huber"; }

/// Column subset selection instance: choose k of the d columns of X (n x d).
struct CssInstance
{
    mat_t X;
    Loss loss = Loss::frobenius;
    double huber_delta = 1.0;
    double ridge = 0;
    std::size_t k = 1;
};

using row_major_t = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * V -> loss(X - X V) + ridge ||V||_F^2 over vec(V) in R^{d*d}, row-major,
 * so coordinates [i*d, (i+1)*d) are row i of V.
 *   frobenius:    loss(R) = ||R||_F^2
 *   pseudo-huber: loss(R) = sum delta^2 (sqrt(1 + (R_ab / delta)^2) - 1)
 */
class CssObjective : public Objective
{
public:
    explicit CssObjective(CssInstance inst) : inst_(std::move(inst))
    {
        if (inst_.ridge < 0) throw ContractError("css: ridge must be >= 0");
        if (inst_.loss == Loss::pseudo_huber && !(inst_.huber_delta > 0)) {
            throw ContractError("css: pseudo-huber delta must be > 0");
        }
        const auto d = inst_.X.cols();
        gram_ = inst_.X.transpose() * inst_.X;
        if (d > 0) {
            Eigen::SelfAdjointEigenSolver<mat_t> es(gram_, Eigen::EigenvaluesOnly);
            strict_ = es.eigenvalues()(0) + inst_.ridge > 1e-12 * (1.0 + es.eigenvalues()(d - 1));
        }
    }

    std::size_t d() const { return static_cast<std::size_t>(inst_.X.cols()); }
    std::size_t dim() const override { return d() * d(); }
    bool strictly_convex() const override { return strict_; }
    const CssInstance& instance() const { return inst_; }

    double value(const vec_t& v) const override
    {
        vec_t g;
        return value_and_gradient(v, g);
    }

    vec_t gradient(const vec_t& v) const override
    {
        vec_t g;
        value_and_gradient(v, g);
        return g;
    }

    double value_and_gradient(const vec_t& v, vec_t& grad) const override
    {
        check_dim(v, dim(), "css objective");
        const auto dd = static_cast<index_t>(d());
        Eigen::Map<const row_major_t> V(v.data(), dd, dd);
        const mat_t R = inst_.X - inst_.X * V;
        double val = inst_.ridge * v.squaredNorm();
        mat_t psi;
        if (inst_.loss == Loss::frobenius) {
            val += R.squaredNorm();
            psi = 2.0 * R;
        } else {
            const double del = inst_.huber_delta;
            psi.resize(R.rows(), R.cols());
            for (index_t a = 0; a < R.rows(); ++a) {
                for (index_t b = 0; b < R.cols(); ++b) {
                    const double q = R(a, b) / del;
                    const double root = std::sqrt(1.0 + q * q);
                    val += del * del * (root - 1.0);
                    psi(a, b) = R(a, b) / root;
                }
            }
        }
        grad.resize(v.size());
        Eigen::Map<row_major_t> G(grad.data(), dd, dd);
        G = -(inst_.X.transpose() * psi) + 2.0 * inst_.ridge * V;
        return val;
    }

    /// Frobenius only: rows S of V solve (X_S^T X_S + ridge I) V_S = X_S^T X.
    std::optional<vec_t> exact_restricted_minimizer(const std::vector<std::size_t>& coords) const override
    {
        if (inst_.loss != Loss::frobenius) return std::nullopt;
        const auto dd = static_cast<index_t>(d());
        std::vector<std::size_t> rows;
        for (auto c : coords) {
            const std::size_t r = c / d();
            if (rows.empty() || rows.back() != r) rows.push_back(r);
        }
        if (coords.size() != rows.size() * d()) return std::nullopt;  // not whole rows
        const auto k = static_cast<index_t>(rows.size());
        mat_t sub(k, k);
        mat_t rhs(k, dd);
        for (index_t a = 0; a < k; ++a) {
            rhs.row(a) = gram_.row(static_cast<index_t>(rows[a]));
            for (index_t b = 0; b < k; ++b) sub(a, b) = gram_(rows[a], rows[b]);
            sub(a, a) += inst_.ridge;
        }
        Eigen::LDLT<mat_t> ldlt(sub);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
        mat_t VS = ldlt.solve(rhs);
        VS += ldlt.solve(rhs - sub * VS);
        vec_t out = vec_t::Zero(static_cast<index_t>(dim()));
        Eigen::Map<row_major_t> V(out.data(), dd, dd);
        for (index_t a = 0; a < k; ++a) V.row(static_cast<index_t>(rows[a])) = VS.row(a);
        return out;
    }

private:
    CssInstance inst_;
    mat_t gram_;
    bool strict_ = false;
};

/// d groups, group i = row i of V.
inline GroupPartition css_partition(std::size_t d)
{
    std::vector<std::size_t> sizes(d, d);
    return GroupPartition::contiguous(sizes);
}

/// Frobenius loss as an explicit quadratic over vec(V): Hessian 2 (X^T X + ridge I) (x) I_d.
inline QuadraticObjective css_quadratic(const CssInstance& inst)
{
    if (inst.loss != Loss::frobenius) throw ContractError("css_quadratic: only the Frobenius loss is quadratic");
    const auto d = inst.X.cols();
    const mat_t G = inst.X.transpose() * inst.X;
    mat_t A = mat_t::Zero(d * d, d * d);
    vec_t b(d * d);
    for (index_t a = 0; a < d; ++a) {
        for (index_t c = 0; c < d; ++c) {
            const double h = 2.0 * (G(a, c) + (a == c ? inst.ridge : 0.0));
            for (index_t e = 0; e < d; ++e) A(a * d + e, c * d + e) = h;
            b[a * d + c] = -2.0 * G(a, c);
        }
    }
    const CssObjective probe(inst);
    return QuadraticObjective(std::move(A), std::move(b), inst.X.squaredNorm(), probe.strictly_convex());
}

/// ||X - X_S (X_S)^+ X||_F^2 via a pseudoinverse.
inline double projection_residual(const mat_t& X, std::span<const std::size_t> cols)
{
    if (cols.empty()) return X.squaredNorm();
    mat_t XS(X.rows(), static_cast<index_t>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) XS.col(static_cast<index_t>(j)) = X.col(static_cast<index_t>(cols[j]));
    const mat_t P = XS * XS.completeOrthogonalDecomposition().pseudoInverse();
    return (X - P * X).squaredNorm();
}

enum class Algorithm { omp, ompr, seq_lasso, seq_attention };

inline Algorithm parse_algorithm(const std::string& s)
{
    if (s == "omp") return Algorithm::omp;
    if (s == "ompr") return Algorithm::ompr;
    if (s == "seq-lasso" || s == "lasso") return Algorithm::seq_lasso;
    if (s == "seq-attention" || s == "attention") return Algorithm::seq_attention;
    throw ContractError("unknown algorithm '" + s + "'");
}

struct CssResult
{
    group_set_t columns;
    mat_t V;          // d x d, zero outside the selected rows
    double value = 0; // min over V supported on the selected rows of loss(X - X V)
    SelectionTrace trace;
};

/**
 * Selects up to k' columns of X by running a group selection algorithm on
 * the rows of V. OMPR starts from OMP's k' columns and runs `ompr_rounds`.
 */
inline CssResult css_select(const CssInstance& inst, Algorithm algo, std::size_t kprime,
                            const SolverConfig& cfg = {}, std::size_t ompr_rounds = 0)
{
    const std::size_t d = static_cast<std::size_t>(inst.X.cols());
    if (kprime > d) throw ContractError("css_select: k' exceeds the number of columns");
    const CssObjective obj(inst);
    if (!obj.strictly_convex()) {
        throw ContractError("css_select: X^T X is singular; a positive ridge is required");
    }
    const auto p = css_partition(d);
    SelectionResult sel;
    switch (algo) {
    case Algorithm::omp: sel = group_omp(obj, p, inst.k, kprime, cfg); break;
    case Algorithm::ompr: {
        OmprOptions opt;
        opt.rounds = ompr_rounds;
        sel = group_ompr(obj, p, inst.k, kprime, opt, cfg);
        break;
    }
    case Algorithm::seq_lasso: sel = sequential_lasso(obj, p, kprime, cfg); break;
    case Algorithm::seq_attention: sel = sequential_attention(obj, p, kprime, cfg); break;
    }
    CssResult out;
    out.columns = sel.selected;
    std::sort(out.columns.begin(), out.columns.end());
    const auto beta = restricted_minimize(obj, p, out.columns, cfg).values;
    out.value = obj.value(beta);
    out.V = Eigen::Map<const row_major_t>(beta.data(), static_cast<index_t>(d), static_cast<index_t>(d));
    out.trace = std::move(sel.trace);
    return out;
}

} // namespace css
} // namespace groupsparse
