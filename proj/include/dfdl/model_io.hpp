#pragma once

// Binary model format, all fields little-endian:
//
//   "DFDL"  u32 version=1  u32 c  u32 d  f64 gamma  f64 theta (NaN if unset)
//   per class: u32 label_len, label bytes (UTF-8), u32 k, k*d f64 atoms (column-major)
//
// The MVP region size is not part of the format.

#include <dfdl/model.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace dfdl {

inline constexpr std::uint32_t model_format_version = 1;

namespace detail {

template <class T>
void put_le(std::string& out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class LeReader {
public:
    explicit LeReader(const std::string& buf) : buf_(buf) {}

    template <class T>
    T get()
    {
        require(pos_ + sizeof(T) <= buf_.size(), ErrorCode::malformed_file,
                "model file truncated");
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(bytes, bytes + sizeof(T));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }

    std::string bytes(std::size_t n)
    {
        require(pos_ + n <= buf_.size(), ErrorCode::malformed_file, "model file truncated");
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const noexcept { return pos_ == buf_.size(); }

private:
    const std::string& buf_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string encode_model(const DfdlModel& model)
{
    model.validate();
    std::string out;
    out.append("DFDL", 4);
    detail::put_le<std::uint32_t>(out, model_format_version);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.class_count()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
    detail::put_le<double>(out, model.gamma);
    detail::put_le<double>(out, model.theta ? *model.theta
                                            : std::numeric_limits<double>::quiet_NaN());
    for (const auto& c : model.classes) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.label.size()));
        out.append(c.label);
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.atoms.cols()));
        for (Index j = 0; j < c.atoms.cols(); ++j)
            for (Index i = 0; i < c.atoms.rows(); ++i) detail::put_le<double>(out, c.atoms(i, j));
    }
    return out;
}

inline DfdlModel decode_model(const std::string& buf)
{
    detail::LeReader in(buf);
    require(buf.size() >= 4 && in.bytes(4) == "DFDL", ErrorCode::bad_magic,
            "not a DFDL model file (bad magic)");
    const auto version = in.get<std::uint32_t>();
    require(version == model_format_version, ErrorCode::unsupported_version,
            "unsupported model format version " + std::to_string(version));
    const auto c = in.get<std::uint32_t>();
    const auto d = in.get<std::uint32_t>();
    DfdlModel model;
    model.gamma = in.get<double>();
    const double theta = in.get<double>();
    if (!std::isnan(theta)) model.theta = theta;
    for (std::uint32_t i = 0; i < c; ++i) {
        ClassDictionary cls;
        cls.label = in.bytes(in.get<std::uint32_t>());
        const auto k = in.get<std::uint32_t>();
        require(static_cast<std::uint64_t>(k) * d * 8 <= buf.size(), ErrorCode::malformed_file,
                "model file truncated");
        cls.atoms.resize(d, k);
        for (Index j = 0; j < static_cast<Index>(k); ++j)
            for (Index r = 0; r < static_cast<Index>(d); ++r) cls.atoms(r, j) = in.get<double>();
        model.classes.push_back(std::move(cls));
    }
    require(in.at_end(), ErrorCode::malformed_file, "trailing bytes after model data");
    model.validate(1e-6);
    return model;
}

inline void save_model(const DfdlModel& model, const std::filesystem::path& path)
{
    const std::string bytes = encode_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::unwritable_path,
            "cannot write model: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::unwritable_path,
            "failed writing model: " + path.string());
}

inline DfdlModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::file_not_found,
            "cannot open model: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_model(buf);
}

} // namespace dfdl
