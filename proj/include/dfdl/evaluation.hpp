#pragma once

#include <dfdl/common.hpp>
#include <dfdl/train.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dfdl {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
    Matrix percent; ///< row-normalized; rows with no samples stay zero

    Index class_count() const noexcept { return counts.rows(); }

    double accuracy() const
    {
        const auto total = counts.sum();
        return total == 0 ? 0.0 : static_cast<double>(counts.trace()) / static_cast<double>(total);
    }
};

inline ConfusionMatrix confusion_matrix(const std::vector<Index>& predictions,
                                        const std::vector<Index>& truths, Index class_count)
{
    require(predictions.size() == truths.size(), ErrorCode::dimension_mismatch,
            "confusion_matrix: prediction and truth lists differ in length");
    require(!truths.empty(), ErrorCode::invalid_argument, "confusion_matrix: empty input");
    require(class_count >= 1, ErrorCode::invalid_argument, "confusion_matrix: no classes");
    ConfusionMatrix cm;
    cm.counts.setZero(class_count, class_count);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        require(truths[i] >= 0 && truths[i] < class_count && predictions[i] >= 0 &&
                    predictions[i] < class_count,
                ErrorCode::invalid_argument, "confusion_matrix: label out of range");
        ++cm.counts(truths[i], predictions[i]);
    }
    cm.percent.setZero(class_count, class_count);
    for (Index r = 0; r < class_count; ++r) {
        const auto row_total = cm.counts.row(r).sum();
        if (row_total == 0) continue;
        for (Index c = 0; c < class_count; ++c)
            cm.percent(r, c) = 100.0 * static_cast<double>(cm.counts(r, c)) /
                               static_cast<double>(row_total);
    }
    return cm;
}

/// Element-wise mean of percentage matrices (e.g. across seeds).
inline Matrix mean_percentages(const std::vector<ConfusionMatrix>& runs)
{
    require(!runs.empty(), ErrorCode::invalid_argument, "mean_percentages: no runs");
    Matrix sum = Matrix::Zero(runs.front().class_count(), runs.front().class_count());
    for (const auto& r : runs) {
        require(r.class_count() == sum.rows(), ErrorCode::dimension_mismatch,
                "mean_percentages: class counts differ");
        sum += r.percent;
    }
    return sum / static_cast<double>(runs.size());
}

struct SweepPoint {
    double parameter = 0.0;
    std::vector<Index> predictions;
    std::vector<Index> truths;
};

struct RocPoint {
    double parameter = 0.0;
    double false_alarm = 0.0; ///< FP / (FP + TN)
    double miss = 0.0;        ///< FN / (FN + TP)
};

struct RocCurve {
    std::vector<RocPoint> points; ///< in sweep order

    /// Index of the point closest to (0, 0); ties go to the earlier point.
    std::size_t closest_to_origin() const
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < points.size(); ++i)
            if (std::hypot(points[i].false_alarm, points[i].miss) <
                std::hypot(points[best].false_alarm, points[best].miss))
                best = i;
        return best;
    }
};

/// Binary operating points; `positive_class` is the detection target.
inline RocCurve roc_curve(const std::vector<SweepPoint>& sweep, Index positive_class)
{
    require(sweep.size() >= 2, ErrorCode::invalid_argument, "roc_curve: need at least 2 sweep points");
    RocCurve curve;
    for (const auto& pt : sweep) {
        require(pt.predictions.size() == pt.truths.size(), ErrorCode::dimension_mismatch,
                "roc_curve: prediction and truth lists differ in length");
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < pt.truths.size(); ++i) {
            const bool truth = pt.truths[i] == positive_class;
            const bool pred = pt.predictions[i] == positive_class;
            if (truth && pred) ++tp;
            else if (truth) ++fn;
            else if (pred) ++fp;
            else ++tn;
        }
        require(tp + fn > 0 && fp + tn > 0, ErrorCode::invalid_argument,
                "roc_curve: both classes must be present in the truths");
        curve.points.push_back({pt.parameter, static_cast<double>(fp) / static_cast<double>(fp + tn),
                                static_cast<double>(fn) / static_cast<double>(fn + tp)});
    }
    return curve;
}

struct SyntheticSpec {
    Index classes = 2;
    Index dim = 48;
    Index atoms_per_class = 8;
    Index samples_per_class = 1000;
    Index sparsity = 2;
    double noise = 0.05;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    std::vector<LabeledSamples> classes;
    std::vector<Matrix> dictionaries; ///< ground truth, d x atoms_per_class, orthonormal columns
};

/// Draws `count` samples per dictionary: nonnegative combinations of
/// `sparsity` distinct atoms (magnitudes uniform in [0.5, 1.5]) plus i.i.d.
/// Gaussian noise of standard deviation `noise`.
inline std::vector<LabeledSamples> draw_synthetic_samples(const std::vector<Matrix>& dictionaries,
                                                          Index count, Index sparsity, double noise,
                                                          std::uint64_t seed)
{
    require(noise >= 0.0, ErrorCode::invalid_argument, "synthetic noise must be >= 0");
    std::vector<LabeledSamples> out;
    for (std::size_t i = 0; i < dictionaries.size(); ++i) {
        const Matrix& D = dictionaries[i];
        require(sparsity >= 1 && sparsity <= D.cols(), ErrorCode::invalid_argument,
                "synthetic sparsity must be in [1, atoms per class]");
        std::mt19937_64 rng(split_seed(seed, i));
        std::uniform_real_distribution<double> magnitude(0.5, 1.5);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<Index> atoms(static_cast<std::size_t>(D.cols()));
        LabeledSamples cls{"class" + std::to_string(i), SampleMatrix(D.rows(), count)};
        for (Index n = 0; n < count; ++n) {
            std::iota(atoms.begin(), atoms.end(), Index{0});
            std::shuffle(atoms.begin(), atoms.end(), rng);
            Vector y = Vector::Zero(D.rows());
            for (Index t = 0; t < sparsity; ++t)
                y += magnitude(rng) * D.col(atoms[static_cast<std::size_t>(t)]);
            if (noise > 0.0)
                for (Index r = 0; r < y.size(); ++r) y(r) += noise * gauss(rng);
            cls.samples.col(n) = y;
        }
        out.push_back(std::move(cls));
    }
    return out;
}

/// Class dictionaries live in disjoint coordinate blocks of width d / c,
/// orthonormalized within the block, then rotated by one shared random
/// orthogonal matrix, so atoms of different classes are mutually orthogonal.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec)
{
    require(spec.classes >= 1 && spec.dim >= 1 && spec.atoms_per_class >= 1 &&
                spec.samples_per_class >= 1,
            ErrorCode::invalid_argument, "synthetic spec fields must be positive");
    require(spec.atoms_per_class * spec.classes <= spec.dim, ErrorCode::invalid_argument,
            "synthetic spec infeasible: atoms per class exceeds d / c");
    require(spec.sparsity >= 1 && spec.sparsity <= spec.atoms_per_class,
            ErrorCode::invalid_argument, "synthetic sparsity must be in [1, atoms per class]");
    require(spec.noise >= 0.0, ErrorCode::invalid_argument, "synthetic noise must be >= 0");

    std::mt19937_64 rng(split_seed(spec.seed, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto gaussian = [&](Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
        return m;
    };

    const Matrix rotation = Eigen::HouseholderQR<Matrix>(gaussian(spec.dim, spec.dim)).householderQ();
    const Index block = spec.dim / spec.classes;
    SyntheticData data;
    for (Index i = 0; i < spec.classes; ++i) {
        const Matrix local = Eigen::HouseholderQR<Matrix>(gaussian(block, spec.atoms_per_class))
                                 .householderQ() *
                             Matrix::Identity(block, spec.atoms_per_class);
        Matrix embedded = Matrix::Zero(spec.dim, spec.atoms_per_class);
        embedded.middleRows(i * block, block) = local;
        Matrix D = rotation * embedded;
        D.colwise().normalize();
        data.dictionaries.push_back(std::move(D));
    }
    data.classes = draw_synthetic_samples(data.dictionaries, spec.samples_per_class, spec.sparsity,
                                          spec.noise, split_seed(spec.seed, 1));
    return data;
}

} // namespace dfdl
