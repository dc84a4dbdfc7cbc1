#pragma once

#include <dfdl/common.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dfdl {

struct ClassDictionary {
    std::string label;
    Matrix atoms; // d x k, unit-norm columns

    friend bool operator==(const ClassDictionary& a, const ClassDictionary& b)
    {
        return a.label == b.label && a.atoms.rows() == b.atoms.rows() &&
               a.atoms.cols() == b.atoms.cols() && a.atoms == b.atoms;
    }
};

/// Per-class dictionaries plus the parameters of the patch and image
/// classifiers built on top of them.
struct DfdlModel {
    std::vector<ClassDictionary> classes;
    double gamma = 0.01;
    std::optional<double> theta;
    std::optional<Index> mvp_m;

    Index class_count() const noexcept { return static_cast<Index>(classes.size()); }
    Index dim() const noexcept { return classes.empty() ? 0 : classes.front().atoms.rows(); }

    Index total_atoms() const noexcept
    {
        Index k = 0;
        for (const auto& c : classes) k += c.atoms.cols();
        return k;
    }

    /// Concatenation [D_1, ..., D_c].
    Matrix total_dictionary() const
    {
        Matrix D(dim(), total_atoms());
        Index offset = 0;
        for (const auto& c : classes) {
            D.middleCols(offset, c.atoms.cols()) = c.atoms;
            offset += c.atoms.cols();
        }
        return D;
    }

    Index class_index(const std::string& label) const
    {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i].label == label) return static_cast<Index>(i);
        throw Error(ErrorCode::unknown_label, "model has no class '" + label + "'");
    }

    /// Shared dimension, unique labels, unit-norm atoms within `norm_tol`.
    void validate(double norm_tol = 1e-6) const
    {
        require(!classes.empty(), ErrorCode::invariant_violation, "model has no classes");
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const auto& c = classes[i];
            require(c.atoms.rows() == dim(), ErrorCode::invariant_violation,
                    "class '" + c.label + "' has a different atom dimension");
            require(c.atoms.cols() >= 1, ErrorCode::invariant_violation,
                    "class '" + c.label + "' has no atoms");
            for (std::size_t j = 0; j < i; ++j)
                require(classes[j].label != c.label, ErrorCode::invariant_violation,
                        "duplicate class label '" + c.label + "'");
            for (Index a = 0; a < c.atoms.cols(); ++a) {
                const double n = c.atoms.col(a).norm();
                require(std::isfinite(n) && std::abs(n - 1.0) <= norm_tol,
                        ErrorCode::invariant_violation,
                        "class '" + c.label + "' atom " + std::to_string(a) +
                            " has norm " + std::to_string(n));
            }
        }
        require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::invariant_violation,
                "model gamma must be positive");
        if (theta)
            require(*theta >= 0.0 && *theta <= 1.0, ErrorCode::invariant_violation,
                    "model theta outside [0,1]");
    }

    friend bool operator==(const DfdlModel& a, const DfdlModel& b)
    {
        const bool theta_eq = a.theta.has_value() == b.theta.has_value() &&
                              (!a.theta || *a.theta == *b.theta);
        return a.classes == b.classes && a.gamma == b.gamma && theta_eq && a.mvp_m == b.mvp_m;
    }
};

} // namespace dfdl
