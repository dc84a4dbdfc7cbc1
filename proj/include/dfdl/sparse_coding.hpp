#pragma once

// Sparse coding against a column-normalized dictionary D (d x k):
//   omp_batch    -- greedy l0-budgeted coding (orthogonal matching pursuit)
//   lasso_batch  -- l1-regularized least squares, min ||y - Ds||^2 + gamma ||s||_1
//
// Both operate column by column with no shared mutable state, so they may
// be run column-parallel without changing a single bit of the output.

#include <dfdl/common.hpp>

#include <cmath>
#include <vector>

namespace dfdl {

/// Coefficients with |value| above this count as nonzero.
inline constexpr double nonzero_threshold = 1e-10;

namespace detail {

inline void check_atoms(const Matrix& D, const char* who)
{
    for (Index j = 0; j < D.cols(); ++j)
        require(D.col(j).squaredNorm() > 0.0, ErrorCode::invalid_argument,
                std::string(who) + ": atom " + std::to_string(j) + " has zero norm");
}

/// Single-column OMP given the Gram matrix G = D^T D and alpha0 = D^T y.
/// Writes the k-length code into `code`.
template <class Code>
void omp_column(const Matrix& D, const Matrix& G, const Eigen::Ref<const Vector>& y,
                const Eigen::Ref<const Vector>& alpha0, Index budget, Code&& code)
{
    const Index k = D.cols();
    code.setZero();
    const double stop = 1e-12 * y.norm();
    if (y.norm() == 0.0) return;

    std::vector<Index> support;
    support.reserve(static_cast<std::size_t>(budget));
    Matrix chol = Matrix::Zero(budget, budget); // lower factor of G restricted to support
    Vector alpha = alpha0;
    Vector coef;
    Vector residual = y;
    std::vector<char> selected(static_cast<std::size_t>(k), 0);

    for (Index step = 0; step < budget; ++step) {
        if (residual.norm() <= stop) break;

        Index best = -1;
        double best_abs = 0.0;
        for (Index j = 0; j < k; ++j) {
            const double a = std::abs(alpha(j));
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < 0 || selected[static_cast<std::size_t>(best)]) break;

        const Index n = static_cast<Index>(support.size());
        double diag_sq = G(best, best);
        if (n > 0) {
            Vector g(n);
            for (Index i = 0; i < n; ++i) g(i) = G(support[static_cast<std::size_t>(i)], best);
            Vector w = chol.topLeftCorner(n, n).triangularView<Eigen::Lower>().solve(g);
            diag_sq -= w.squaredNorm();
            if (diag_sq <= 1e-14 * G(best, best)) break; // new atom is in the span
            chol.block(n, 0, 1, n) = w.transpose();
        }
        chol(n, n) = std::sqrt(diag_sq);
        support.push_back(best);
        selected[static_cast<std::size_t>(best)] = 1;

        const Index m = n + 1;
        Vector rhs(m);
        for (Index i = 0; i < m; ++i) rhs(i) = alpha0(support[static_cast<std::size_t>(i)]);
        const auto lower = chol.topLeftCorner(m, m).triangularView<Eigen::Lower>();
        coef = lower.solve(rhs);
        lower.transpose().solveInPlace(coef);

        alpha = alpha0;
        residual = y;
        for (Index i = 0; i < m; ++i) {
            const Index atom = support[static_cast<std::size_t>(i)];
            alpha.noalias() -= coef(i) * G.col(atom);
            residual.noalias() -= coef(i) * D.col(atom);
        }
    }
    for (std::size_t i = 0; i < support.size(); ++i) code(support[i]) = coef(static_cast<Index>(i));
}

inline double soft_threshold(double v, double t)
{
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

/// Coordinate descent on ||y - Ds||^2 + gamma ||s||_1 using G = D^T D and
/// alpha0 = D^T y. `code` holds the warm start on entry.
template <class Code>
void lasso_column(const Matrix& G, const Eigen::Ref<const Vector>& alpha0, double y_norm,
                  double gamma, Code&& code)
{
    const Index k = G.cols();
    if (y_norm == 0.0) {
        code.setZero();
        return;
    }
    Vector s = code;
    Vector q = G * s; // q = G s, maintained incrementally
    const double half_gamma = 0.5 * gamma;
    const double tol = 1e-13 * y_norm;
    constexpr int max_passes = 200000;

    auto update = [&](Index j) {
        const double gjj = G(j, j);
        if (gjj <= 0.0) return 0.0;
        const double c = alpha0(j) - (q(j) - gjj * s(j));
        const double next = soft_threshold(c, half_gamma) / gjj;
        const double delta = next - s(j);
        if (delta != 0.0) {
            q.noalias() += delta * G.col(j);
            s(j) = next;
        }
        return std::abs(delta) * std::sqrt(gjj);
    };

    std::vector<Index> active;
    for (int pass = 0; pass < max_passes; ++pass) {
        double full_change = 0.0;
        for (Index j = 0; j < k; ++j) full_change = std::max(full_change, update(j));
        if (full_change <= tol) break;

        active.clear();
        for (Index j = 0; j < k; ++j)
            if (s(j) != 0.0) active.push_back(j);
        for (; pass < max_passes; ++pass) {
            double change = 0.0;
            for (Index j : active) change = std::max(change, update(j));
            if (change <= tol) break;
        }
        // Periodically rebuild q to keep roundoff from accumulating.
        q.noalias() = G * s;
    }
    code = s;
}

} // namespace detail

/// Orthogonal matching pursuit on every column of Y with at most `budget`
/// atoms per column. Atom ties go to the lowest index; a column stops early
/// once its residual norm is <= 1e-12 ||y||.
inline SparseCodes omp_batch(const Matrix& D, const SampleMatrix& Y, Index budget)
{
    require(D.rows() == Y.rows(), ErrorCode::dimension_mismatch,
            "omp_batch: dictionary has " + std::to_string(D.rows()) + " rows, samples have " +
                std::to_string(Y.rows()));
    require(budget >= 1 && budget <= std::min(D.rows(), D.cols()), ErrorCode::invalid_argument,
            "omp_batch: sparsity budget " + std::to_string(budget) + " outside [1, min(d,k)]");
    detail::check_atoms(D, "omp_batch");

    const Matrix G = D.transpose() * D;
    const Matrix alpha0 = D.transpose() * Y;
    SparseCodes S(D.cols(), Y.cols());
    parallel_for(Y.cols(), [&](Index j) {
        detail::omp_column(D, G, Y.col(j), alpha0.col(j), budget, S.col(j));
    });
    return S;
}

/// l1-regularized coding of every column of Y. `warm_start`, when given,
/// must be k x N and seeds the solver; the optimum does not depend on it
/// beyond solver tolerance.
inline SparseCodes lasso_batch(const Matrix& D, const SampleMatrix& Y, double gamma,
                               const SparseCodes* warm_start = nullptr)
{
    require(D.rows() == Y.rows(), ErrorCode::dimension_mismatch,
            "lasso_batch: dictionary has " + std::to_string(D.rows()) + " rows, samples have " +
                std::to_string(Y.rows()));
    require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
            "lasso_batch: gamma must be positive");
    if (warm_start)
        require(warm_start->rows() == D.cols() && warm_start->cols() == Y.cols(),
                ErrorCode::dimension_mismatch, "lasso_batch: warm start has wrong shape");

    const Matrix G = D.transpose() * D;
    const Matrix alpha0 = D.transpose() * Y;
    SparseCodes S = warm_start ? *warm_start : SparseCodes::Zero(D.cols(), Y.cols());
    parallel_for(Y.cols(), [&](Index j) {
        detail::lasso_column(G, alpha0.col(j), Y.col(j).norm(), gamma, S.col(j));
    });
    return S;
}

inline Index count_nonzeros(const Eigen::Ref<const Vector>& s)
{
    return (s.array().abs() > nonzero_threshold).count();
}

/// Average number of nonzeros per column, rounded half-up and clamped to [1, k].
inline Index estimate_sparsity_level(const SparseCodes& S0)
{
    require(S0.rows() > 0 && S0.cols() > 0, ErrorCode::invalid_argument,
            "estimate_sparsity_level: empty code matrix");
    const Index total = (S0.array().abs() > nonzero_threshold).count();
    const Index n = S0.cols();
    const Index rounded = (2 * total + n) / (2 * n);
    return std::clamp<Index>(rounded, 1, S0.rows());
}

} // namespace dfdl
