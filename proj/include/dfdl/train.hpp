#pragma once

// Discriminative per-class dictionary training.
//
// For one class with in-class samples Y (d x N) and complementary samples
// Ybar (d x Nbar) the dictionary D minimizes
//
//   (1/N) min ||Y - D S||_F^2  -  (rho/Nbar) min ||Ybar - D Sbar||_F^2
//
// over unit-norm atoms, with both inner minima taken under a common l0
// budget L. Training alternates joint OMP coding of [Y, Ybar] with a
// Gauss-Seidel sweep over atoms on the quadratic
//
//   -2 tr(E D^T) + tr(D Fhat D^T),   Fhat = F - lambda_min(F) I,
//
// where E and F are the sample/code cross statistics. Shifting F by its
// smallest eigenvalue makes the per-atom subproblem convex and changes the
// objective on the unit-norm set only by the constant k * lambda_min(F).

#include <dfdl/common.hpp>
#include <dfdl/model.hpp>
#include <dfdl/sparse_coding.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dfdl {

struct TrainConfig {
    Index k = 500;                 ///< atoms per class
    double rho = 0.001;            ///< weight of the complementary-class term
    double lambda = 0.1;           ///< l1 weight of the warm-start coding
    double gamma = 0.01;           ///< l1 weight of the patch classifier
    Index patch_side = 20;
    Index patches_per_class = 10000;
    int max_outer_iterations = 30;
    double tolerance = 1e-4;       ///< relative objective change between outer iterations
    int max_sweeps = 50;           ///< dictionary sweeps per outer iteration
    double sweep_tolerance = 1e-6;
    int odl_iterations = 20;
    std::uint64_t seed = 0;
};

struct CrossStats {
    Matrix E;      ///< d x k
    Matrix F;      ///< k x k, symmetric
    Matrix F_hat;  ///< F - lambda_min I, positive semidefinite
    double lambda_min = 0.0;
};

/// Smallest eigenvalue of a symmetric matrix. The input is symmetrized as
/// (F + F^T)/2 before the (self-adjoint) eigen-decomposition.
inline double min_eigenvalue_sym(const Matrix& F)
{
    require(F.rows() == F.cols() && F.rows() > 0, ErrorCode::dimension_mismatch,
            "min_eigenvalue_sym: matrix must be square and non-empty");
    require(F.allFinite(), ErrorCode::numeric_failure, "min_eigenvalue_sym: non-finite entries");
    const Matrix sym = 0.5 * (F + F.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorCode::numeric_failure,
            "min_eigenvalue_sym: eigen-decomposition failed");
    return solver.eigenvalues().minCoeff();
}

namespace detail {

/// Adds weight * (Y S^T, S S^T) to (E, F), visiting only nonzero codes.
inline void accumulate_cross(const SampleMatrix& Y, const SparseCodes& S, double weight,
                             Matrix& E, Matrix& F)
{
    std::vector<Index> nz;
    for (Index n = 0; n < S.cols(); ++n) {
        nz.clear();
        for (Index a = 0; a < S.rows(); ++a)
            if (S(a, n) != 0.0) nz.push_back(a);
        for (std::size_t p = 0; p < nz.size(); ++p) {
            const Index a = nz[p];
            const double wa = weight * S(a, n);
            E.col(a).noalias() += wa * Y.col(n);
            for (std::size_t q = p; q < nz.size(); ++q) {
                const Index b = nz[q];
                const double v = wa * S(b, n);
                F(a, b) += v;
                if (b != a) F(b, a) += v;
            }
        }
    }
}

/// ||y_n - D s_n||^2 per column, using only the nonzero codes.
inline Vector squared_residuals(const Matrix& D, const SampleMatrix& Y, const SparseCodes& S)
{
    Vector out(Y.cols());
    parallel_for(Y.cols(), [&](Index n) {
        Vector r = Y.col(n);
        for (Index a = 0; a < S.rows(); ++a)
            if (S(a, n) != 0.0) r.noalias() -= S(a, n) * D.col(a);
        out(n) = r.squaredNorm();
    });
    return out;
}

inline bool relative_change_below(double previous, double current, double tol)
{
    const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
    return std::abs(previous - current) < tol * scale;
}

} // namespace detail

/// E = (1/N) Y S^T - (rho/Nbar) Ybar Sbar^T,  F = (1/N) S S^T - (rho/Nbar) Sbar Sbar^T.
/// An empty Ybar drops the second terms.
inline CrossStats compute_cross_stats(const SampleMatrix& Y, const SampleMatrix& Ybar,
                                      const SparseCodes& S, const SparseCodes& Sbar, double rho)
{
    require(Y.cols() >= 1, ErrorCode::invalid_argument, "compute_cross_stats: Y is empty");
    require(S.cols() == Y.cols(), ErrorCode::dimension_mismatch,
            "compute_cross_stats: S and Y column counts differ");
    require(Sbar.cols() == Ybar.cols(), ErrorCode::dimension_mismatch,
            "compute_cross_stats: Sbar and Ybar column counts differ");
    require(Ybar.cols() == 0 || (Ybar.rows() == Y.rows() && Sbar.rows() == S.rows()),
            ErrorCode::dimension_mismatch, "compute_cross_stats: dimension mismatch");
    require(rho >= 0.0, ErrorCode::invalid_argument, "compute_cross_stats: rho must be >= 0");

    const Index d = Y.rows();
    const Index k = S.rows();
    CrossStats st;
    st.E = Matrix::Zero(d, k);
    st.F = Matrix::Zero(k, k);
    detail::accumulate_cross(Y, S, 1.0 / static_cast<double>(Y.cols()), st.E, st.F);
    if (Ybar.cols() > 0 && rho != 0.0)
        detail::accumulate_cross(Ybar, Sbar, -rho / static_cast<double>(Ybar.cols()), st.E, st.F);
    st.lambda_min = min_eigenvalue_sym(st.F);
    st.F_hat = st.F;
    st.F_hat.diagonal().array() -= st.lambda_min;
    return st;
}

/// -2 tr(E D^T) + tr(D Fhat D^T).
inline double surrogate_objective(const Matrix& D, const CrossStats& stats)
{
    require(D.rows() == stats.E.rows() && D.cols() == stats.E.cols() &&
                stats.F_hat.rows() == D.cols() && stats.F_hat.cols() == D.cols(),
            ErrorCode::dimension_mismatch, "surrogate_objective: dimension mismatch");
    const Matrix gram = D.transpose() * D;
    return -2.0 * stats.E.cwiseProduct(D).sum() + gram.cwiseProduct(stats.F_hat).sum();
}

/// Source of replacement atoms for atoms that no sample uses.
struct AtomRefill {
    const SampleMatrix* samples = nullptr;
    std::vector<char> unused; ///< per atom: code row is identically zero
    std::mt19937_64* rng = nullptr;
};

namespace detail {

inline bool refill_atom(Matrix& D, Index j, AtomRefill& refill)
{
    if (!refill.samples || !refill.rng || refill.samples->cols() == 0) return false;
    if (static_cast<std::size_t>(j) >= refill.unused.size() ||
        !refill.unused[static_cast<std::size_t>(j)])
        return false;
    std::uniform_int_distribution<Index> pick(0, refill.samples->cols() - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Index n = pick(*refill.rng);
        const double norm = refill.samples->col(n).norm();
        if (norm > 1e-10) {
            D.col(j) = refill.samples->col(n) / norm;
            return true;
        }
    }
    return false;
}

} // namespace detail

/// Block-coordinate sweeps over atoms j = 1..k:
///   u_j = (e_j - D fhat_j) / Fhat_jj + d_j,   d_j = u_j / ||u_j||.
/// Evaluated as Fhat_jj u_j, which keeps the direction and stays defined
/// when Fhat_jj = 0. Stops when a full sweep improves the surrogate objective
/// by less than `tol` (relative) or after `max_sweeps`. Atoms whose update
/// vanishes are left in place, or replaced once through `refill` when their
/// code row is zero.
inline Matrix dictionary_update_sweeps(Matrix D, const CrossStats& stats, int max_sweeps,
                                       double tol, AtomRefill* refill = nullptr,
                                       std::vector<double>* history = nullptr)
{
    const Index k = D.cols();
    require(stats.F_hat.rows() == k && stats.E.cols() == k && stats.E.rows() == D.rows(),
            ErrorCode::dimension_mismatch, "dictionary_update_sweeps: dimension mismatch");
    std::vector<char> replaced(static_cast<std::size_t>(k), 0);

    double previous = surrogate_objective(D, stats);
    if (history) history->push_back(previous);
    Vector u(D.rows());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (Index j = 0; j < k; ++j) {
            const double fjj = std::max(stats.F_hat(j, j), 0.0);
            u.noalias() = stats.E.col(j) - D * stats.F_hat.col(j);
            u += fjj * D.col(j);
            const double scale = stats.E.col(j).norm() + stats.F_hat.col(j).norm();
            const double norm = u.norm();
            const bool degenerate = !(norm > 1e-12 * scale) || norm == 0.0;
            if (!degenerate) D.col(j) = u / norm;
            if (degenerate && refill && !replaced[static_cast<std::size_t>(j)])
                replaced[static_cast<std::size_t>(j)] = detail::refill_atom(D, j, *refill);
        }
        const double current = surrogate_objective(D, stats);
        if (history) history->push_back(current);
        const bool done = detail::relative_change_below(previous, current, tol);
        previous = current;
        if (done) break;
    }
    return D;
}

struct OdlResult {
    Matrix dictionary;
    SparseCodes codes;
    bool degenerate_input = false; ///< fewer than k distinct nonzero samples
};

/// Warm start: alternates l1 coding of Y under ||Y - DS||^2 + 2 lambda ||S||_1
/// with unit-norm dictionary sweeps, starting from k distinct sample columns.
inline OdlResult odl_init(const SampleMatrix& Y, Index k, double lambda, int iterations,
                          std::uint64_t seed, int max_sweeps = 50, double sweep_tol = 1e-6)
{
    require(k >= 1 && k <= Y.cols(), ErrorCode::invalid_argument,
            "odl_init: need 1 <= k <= N (k=" + std::to_string(k) +
                ", N=" + std::to_string(Y.cols()) + ")");
    require(iterations >= 1, ErrorCode::invalid_argument, "odl_init: iterations must be >= 1");
    require(lambda > 0.0, ErrorCode::invalid_argument, "odl_init: lambda must be positive");

    std::mt19937_64 rng(seed);
    std::vector<Index> order(static_cast<std::size_t>(Y.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    OdlResult out;
    Matrix& D = out.dictionary;
    D.resize(Y.rows(), k);
    Index filled = 0;
    std::unordered_multimap<std::size_t, Index> seen;
    for (Index n : order) {
        if (filled == k) break;
        const auto col = Y.col(n);
        if (col.norm() == 0.0) continue;
        const std::string_view bytes(reinterpret_cast<const char*>(col.data()),
                                     static_cast<std::size_t>(col.size()) * sizeof(double));
        const std::size_t h = std::hash<std::string_view>{}(bytes);
        bool duplicate = false;
        for (auto [it, end] = seen.equal_range(h); it != end; ++it)
            if (Y.col(it->second) == col) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        seen.emplace(h, n);
        D.col(filled++) = col / col.norm();
    }
    if (filled < k) {
        out.degenerate_input = true;
        std::normal_distribution<double> noise(0.0, 1.0);
        const Index base = std::max<Index>(filled, 1);
        for (Index j = filled; j < k; ++j) {
            Vector v = filled > 0 ? Vector(D.col(j % base)) : Vector::Zero(Y.rows());
            for (Index i = 0; i < v.size(); ++i) v(i) += 0.1 * noise(rng);
            D.col(j) = v / v.norm();
        }
    }

    SparseCodes S;
    const SampleMatrix no_samples(Y.rows(), 0);
    const SparseCodes no_codes(k, 0);
    for (int it = 0; it < iterations; ++it) {
        S = lasso_batch(D, Y, 2.0 * lambda, it == 0 ? nullptr : &S);
        const CrossStats stats = compute_cross_stats(Y, no_samples, S, no_codes, 0.0);
        AtomRefill refill{&Y, {}, &rng};
        refill.unused.resize(static_cast<std::size_t>(k));
        for (Index j = 0; j < k; ++j)
            refill.unused[static_cast<std::size_t>(j)] = S.row(j).cwiseAbs().maxCoeff() == 0.0;
        D = dictionary_update_sweeps(std::move(D), stats, max_sweeps, sweep_tol, &refill);
    }
    out.codes = lasso_batch(D, Y, 2.0 * lambda, &S);
    return out;
}

/// (1/N) sum ||y - D s||^2 - (rho/Nbar) sum ||ybar - D sbar||^2 with OMP codes.
inline double dfdl_objective(const Matrix& D, const SampleMatrix& Y, const SampleMatrix& Ybar,
                             Index budget, double rho)
{
    require(Y.cols() >= 1, ErrorCode::invalid_argument, "dfdl_objective: Y is empty");
    const double in_class = detail::squared_residuals(D, Y, omp_batch(D, Y, budget)).sum() /
                            static_cast<double>(Y.cols());
    if (Ybar.cols() == 0 || rho == 0.0) return in_class;
    const double out_class = detail::squared_residuals(D, Ybar, omp_batch(D, Ybar, budget)).sum() /
                             static_cast<double>(Ybar.cols());
    return in_class - rho * out_class;
}

struct ClassTrainResult {
    Matrix dictionary;
    Index sparsity = 0;
    std::vector<double> objective; ///< per outer iteration, before its dictionary update
    int outer_iterations = 0;      ///< dictionary updates performed
    bool converged = false;
    bool degenerate_init = false;
};

/// Trains one class dictionary from in-class samples Y and complementary samples Ybar.
inline ClassTrainResult train_class_dictionary(const SampleMatrix& Y, const SampleMatrix& Ybar,
                                               const TrainConfig& cfg)
{
    require(Y.cols() >= 1 && Ybar.cols() >= 1, ErrorCode::invalid_argument,
            "train_class_dictionary: both sample sets must be non-empty");
    require(Ybar.rows() == Y.rows(), ErrorCode::dimension_mismatch,
            "train_class_dictionary: sample dimensions differ");
    require(cfg.k >= 1 && cfg.k <= Y.cols(), ErrorCode::invalid_argument,
            "train_class_dictionary: need k <= N (k=" + std::to_string(cfg.k) +
                ", N=" + std::to_string(Y.cols()) + ")");
    require(cfg.rho >= 0.0, ErrorCode::invalid_argument, "rho must be >= 0");

    ClassTrainResult res;
    OdlResult init = odl_init(Y, cfg.k, cfg.lambda, cfg.odl_iterations, split_seed(cfg.seed, 1),
                              cfg.max_sweeps, cfg.sweep_tolerance);
    res.degenerate_init = init.degenerate_input;
    res.sparsity = std::min(estimate_sparsity_level(init.codes), Y.rows());
    Matrix D = std::move(init.dictionary);

    const Index n_in = Y.cols();
    const Index n_out = Ybar.cols();
    SampleMatrix joint(Y.rows(), n_in + n_out);
    joint << Y, Ybar;

    std::mt19937_64 rng(split_seed(cfg.seed, 2));
    for (int it = 0; it <= cfg.max_outer_iterations; ++it) {
        const SparseCodes codes = omp_batch(D, joint, res.sparsity);
        const SparseCodes S = codes.leftCols(n_in);
        const SparseCodes Sbar = codes.rightCols(n_out);

        const Vector resid = detail::squared_residuals(D, joint, codes);
        const double objective = resid.head(n_in).sum() / static_cast<double>(n_in) -
                                 cfg.rho * resid.tail(n_out).sum() / static_cast<double>(n_out);
        if (!res.objective.empty() &&
            detail::relative_change_below(res.objective.back(), objective, cfg.tolerance)) {
            res.objective.push_back(objective);
            res.converged = true;
            break;
        }
        res.objective.push_back(objective);
        if (it == cfg.max_outer_iterations) break;

        const CrossStats stats = compute_cross_stats(Y, Ybar, S, Sbar, cfg.rho);
        AtomRefill refill{&Y, {}, &rng};
        refill.unused.resize(static_cast<std::size_t>(cfg.k));
        for (Index j = 0; j < cfg.k; ++j)
            refill.unused[static_cast<std::size_t>(j)] = codes.row(j).cwiseAbs().maxCoeff() == 0.0;
        D = dictionary_update_sweeps(std::move(D), stats, cfg.max_sweeps, cfg.sweep_tolerance,
                                     &refill);
        ++res.outer_iterations;
    }
    require(D.allFinite(), ErrorCode::numeric_failure, "training produced non-finite atoms");
    res.dictionary = std::move(D);
    return res;
}

struct LabeledSamples {
    std::string label;
    SampleMatrix samples;
};

/// Trains one dictionary per class against the union of all other classes.
/// Theta and the MVP region size are left unset.
inline DfdlModel train_model(const std::vector<LabeledSamples>& dataset, const TrainConfig& cfg,
                             std::vector<ClassTrainResult>* diagnostics = nullptr)
{
    require(dataset.size() >= 2, ErrorCode::invalid_argument,
            "train_model: at least 2 classes are required (got " +
                std::to_string(dataset.size()) + ")");
    const Index d = dataset.front().samples.rows();
    for (const auto& cls : dataset) {
        require(cls.samples.cols() >= 1, ErrorCode::invalid_argument,
                "train_model: class '" + cls.label + "' has no samples");
        require(cls.samples.rows() == d, ErrorCode::dimension_mismatch,
                "train_model: class '" + cls.label + "' has a different sample dimension");
        require(cls.samples.cols() >= cfg.k, ErrorCode::invalid_argument,
                "train_model: class '" + cls.label + "' has fewer samples than k");
    }

    DfdlModel model;
    model.gamma = cfg.gamma;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Index n_out = 0;
        for (std::size_t j = 0; j < dataset.size(); ++j)
            if (j != i) n_out += dataset[j].samples.cols();
        SampleMatrix complement(d, n_out);
        Index offset = 0;
        for (std::size_t j = 0; j < dataset.size(); ++j) {
            if (j == i) continue;
            complement.middleCols(offset, dataset[j].samples.cols()) = dataset[j].samples;
            offset += dataset[j].samples.cols();
        }
        TrainConfig class_cfg = cfg;
        class_cfg.seed = split_seed(cfg.seed, 100 + i);
        ClassTrainResult res = train_class_dictionary(dataset[i].samples, complement, class_cfg);
        model.classes.push_back({dataset[i].label, res.dictionary});
        if (diagnostics) diagnostics->push_back(std::move(res));
    }
    return model;
}

} // namespace dfdl
