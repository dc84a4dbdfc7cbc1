#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dfdl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Column-stacked samples, one vectorized patch per column (d x N).
using SampleMatrix = Matrix;
/// Coefficient matrix (k x N), one code per sample column.
using SparseCodes = Matrix;

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    file_not_found,
    malformed_file,
    unsupported_format,
    unwritable_path,
    bad_magic,
    unsupported_version,
    invariant_violation,
    unknown_label,
    numeric_failure,
    overflow,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::file_not_found: return "file not found";
    case ErrorCode::malformed_file: return "malformed file";
    case ErrorCode::unsupported_format: return "unsupported format";
    case ErrorCode::unwritable_path: return "unwritable path";
    case ErrorCode::bad_magic: return "bad magic";
    case ErrorCode::unsupported_version: return "unsupported version";
    case ErrorCode::invariant_violation: return "invariant violation";
    case ErrorCode::unknown_label: return "unknown label";
    case ErrorCode::numeric_failure: return "numeric failure";
    case ErrorCode::overflow: return "overflow";
    }
    return "unknown error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) throw Error(code, what);
}

/// SplitMix64 step; used to derive independent sub-seeds from one user seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {
inline std::atomic<int>& thread_setting()
{
    static std::atomic<int> n{0};
    return n;
}
} // namespace detail

/// Caps worker parallelism. 0 means "read DFDL_THREADS, else 1".
inline void set_num_threads(int n) { detail::thread_setting() = std::max(0, n); }

inline int num_threads()
{
    int n = detail::thread_setting();
    if (n > 0) return n;
    if (const char* env = std::getenv("DFDL_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

/// Runs fn(i) for i in [0, count). Work is split into contiguous blocks;
/// fn must not share mutable state across indices.
template <class Fn>
void parallel_for(Index count, Fn&& fn)
{
    const int workers = static_cast<int>(std::min<Index>(num_threads(), count));
    if (workers <= 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    pool.reserve(static_cast<std::size_t>(workers));
    const Index block = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const Index begin = w * block;
        const Index end = std::min(count, begin + block);
        if (begin >= end) break;
        pool.emplace_back([&fn, &errors, w, begin, end] {
            try {
                for (Index i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace dfdl
