#pragma once

// Sparse-representation patch classification: code y against the
// concatenated dictionary [D_1, ..., D_c] with an l1 penalty, then pick the
// class whose own block of coefficients reconstructs y best.

#include <dfdl/model.hpp>
#include <dfdl/sparse_coding.hpp>

#include <vector>

namespace dfdl {

struct PatchPrediction {
    Index label = 0;  ///< index into model.classes
    Vector residuals; ///< r_i = ||y - D_i delta_i(s)||_2
    Vector code;      ///< full code over the concatenated dictionary
};

/// Lowest index wins ties.
inline Index argmin_residual(const Vector& r)
{
    Index best = 0;
    for (Index i = 1; i < r.size(); ++i)
        if (r(i) < r(best)) best = i;
    return best;
}

inline Vector class_residuals(const DfdlModel& model, const Eigen::Ref<const Vector>& code,
                              const Eigen::Ref<const Vector>& y)
{
    require(code.size() == model.total_atoms(), ErrorCode::dimension_mismatch,
            "class_residuals: code length " + std::to_string(code.size()) + " != total atoms " +
                std::to_string(model.total_atoms()));
    require(y.size() == model.dim(), ErrorCode::dimension_mismatch,
            "class_residuals: sample length does not match model dimension");
    Vector r(model.class_count());
    Index offset = 0;
    for (Index i = 0; i < model.class_count(); ++i) {
        const Matrix& D = model.classes[static_cast<std::size_t>(i)].atoms;
        r(i) = (y - D * code.segment(offset, D.cols())).norm();
        offset += D.cols();
    }
    return r;
}

inline std::vector<PatchPrediction> classify_patch_batch(const DfdlModel& model,
                                                         const SampleMatrix& Y)
{
    require(Y.rows() == model.dim(), ErrorCode::dimension_mismatch,
            "classify_patch_batch: samples have dimension " + std::to_string(Y.rows()) +
                ", model expects " + std::to_string(model.dim()));
    const SparseCodes codes = lasso_batch(model.total_dictionary(), Y, model.gamma);
    std::vector<PatchPrediction> out(static_cast<std::size_t>(Y.cols()));
    parallel_for(Y.cols(), [&](Index j) {
        auto& p = out[static_cast<std::size_t>(j)];
        p.code = codes.col(j);
        p.residuals = class_residuals(model, p.code, Y.col(j));
        p.label = argmin_residual(p.residuals);
    });
    return out;
}

inline std::vector<Index> predicted_labels(const std::vector<PatchPrediction>& predictions)
{
    std::vector<Index> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions) out.push_back(p.label);
    return out;
}

} // namespace dfdl
