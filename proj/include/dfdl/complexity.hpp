#pragma once

// Leading-order operation counts for the sparse coding stage of several
// dictionary learning methods. With c classes of N samples and k atoms
// each, data dimension d, sparsity L and q inner l1 iterations:
//
//   batch-omp       kN(2d + L^2)
//   batch-omp-full  N(2dk + L^2 k + 3Lk + L^3) + dk^2
//   dfdl            c^2 kN(2d + L^2)
//   lc-ksvd         c^2 kN(2d + 2ck + L^2)
//   nayak           c^2 kN(2d + 2qck) + c^2 dk^2
//   fddl            c^2 kN(2d + 2qck) + c^3 dk^2
//
// All arithmetic is exact on unsigned 64-bit integers; overflow throws.

#include <dfdl/common.hpp>

#include <array>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dfdl {

enum class Method { batch_omp, batch_omp_full, dfdl, lc_ksvd, nayak, fddl };

inline constexpr std::array<Method, 6> all_methods = {Method::batch_omp, Method::batch_omp_full,
                                                      Method::dfdl,      Method::lc_ksvd,
                                                      Method::nayak,     Method::fddl};

inline std::string_view method_name(Method m)
{
    switch (m) {
    case Method::batch_omp: return "batch-omp";
    case Method::batch_omp_full: return "batch-omp-full";
    case Method::dfdl: return "dfdl";
    case Method::lc_ksvd: return "lc-ksvd";
    case Method::nayak: return "nayak";
    case Method::fddl: return "fddl";
    }
    return "?";
}

inline Method parse_method(std::string_view name)
{
    for (Method m : all_methods)
        if (method_name(m) == name) return m;
    throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

inline bool method_uses_q(Method m) { return m == Method::nayak || m == Method::fddl; }

struct ComplexityParams {
    std::uint64_t c = 0;
    std::uint64_t k = 0;
    std::uint64_t N = 0;
    std::uint64_t d = 0;
    std::uint64_t L = 0;
    std::optional<std::uint64_t> q;
};

namespace detail {

/// Checked unsigned arithmetic.
class Count {
public:
    constexpr Count(std::uint64_t v = 0) : v_(v) {}
    constexpr std::uint64_t value() const noexcept { return v_; }

    friend Count operator+(Count a, Count b)
    {
        std::uint64_t r;
        if (__builtin_add_overflow(a.v_, b.v_, &r))
            throw Error(ErrorCode::overflow, "operation count overflows 64 bits");
        return r;
    }
    friend Count operator*(Count a, Count b)
    {
        std::uint64_t r;
        if (__builtin_mul_overflow(a.v_, b.v_, &r))
            throw Error(ErrorCode::overflow, "operation count overflows 64 bits");
        return r;
    }

private:
    std::uint64_t v_;
};

} // namespace detail

inline std::uint64_t ops_estimate(Method method, const ComplexityParams& p)
{
    require(p.c >= 1 && p.k >= 1 && p.N >= 1 && p.d >= 1 && p.L >= 1, ErrorCode::invalid_argument,
            "complexity parameters c, k, N, d, L must be positive");
    if (method_uses_q(method))
        require(p.q.has_value() && *p.q >= 1, ErrorCode::invalid_argument,
                std::string(method_name(method)) + " needs a positive q");

    using detail::Count;
    const Count c = p.c, k = p.k, N = p.N, d = p.d, L = p.L;
    const Count two = 2;
    switch (method) {
    case Method::batch_omp:
        return (k * N * (two * d + L * L)).value();
    case Method::batch_omp_full:
        return (N * (two * d * k + L * L * k + Count(3) * L * k + L * L * L) + d * k * k).value();
    case Method::dfdl:
        return (c * c * k * N * (two * d + L * L)).value();
    case Method::lc_ksvd:
        return (c * c * k * N * (two * d + two * c * k + L * L)).value();
    case Method::nayak: {
        const Count q = *p.q;
        return (c * c * k * N * (two * d + two * q * c * k) + c * c * d * k * k).value();
    }
    case Method::fddl: {
        const Count q = *p.q;
        return (c * c * k * N * (two * d + two * q * c * k) + c * c * c * d * k * k).value();
    }
    }
    throw Error(ErrorCode::invalid_argument, "unknown method");
}

struct ComplexityRow {
    Method method;
    std::vector<std::uint64_t> counts; ///< one per q value
};

struct ComplexityTable {
    std::vector<std::uint64_t> q_values;
    std::vector<ComplexityRow> rows;

    std::string to_csv() const
    {
        std::ostringstream os;
        os << "method";
        for (auto q : q_values) os << ",q=" << q;
        os << '\n';
        for (const auto& row : rows) {
            os << method_name(row.method);
            for (auto v : row.counts) os << ',' << v;
            os << '\n';
        }
        return os.str();
    }

    /// Human-readable table in scientific notation.
    std::string to_text() const
    {
        std::ostringstream os;
        os << std::left << std::setw(16) << "method";
        for (auto q : q_values) os << std::right << std::setw(14) << ("q=" + std::to_string(q));
        os << '\n';
        for (const auto& row : rows) {
            os << std::left << std::setw(16) << method_name(row.method);
            for (auto v : row.counts) {
                std::ostringstream cell;
                cell << std::setprecision(4) << std::scientific << static_cast<double>(v);
                os << std::right << std::setw(14) << cell.str();
            }
            os << '\n';
        }
        return os.str();
    }
};

inline ComplexityTable complexity_table(ComplexityParams p, const std::vector<std::uint64_t>& q_values,
                                        const std::vector<Method>& methods = {Method::dfdl,
                                                                              Method::lc_ksvd,
                                                                              Method::nayak,
                                                                              Method::fddl})
{
    require(!q_values.empty(), ErrorCode::invalid_argument, "complexity_table: empty q list");
    ComplexityTable table;
    table.q_values = q_values;
    for (Method m : methods) {
        ComplexityRow row{m, {}};
        for (auto q : q_values) {
            p.q = q;
            row.counts.push_back(ops_estimate(m, p));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace dfdl
