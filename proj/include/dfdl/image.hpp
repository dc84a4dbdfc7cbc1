#pragma once

// RGB image decoding, random patch sampling and non-overlapping tiling.
//
// A patch of side s is vectorized plane by plane: the R plane (row-major),
// then G, then B, so element i of a column is plane i / s^2, pixel row
// (i % s^2) / s, pixel column i % s. Intensities are 8-bit values / 255.

#include <dfdl/common.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

namespace dfdl {

class ImageRGB {
public:
    ImageRGB() = default;
    ImageRGB(Index width, Index height)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(3 * width * height), 0.0)
    {
        require(width >= 0 && height >= 0, ErrorCode::invalid_argument,
                "image dimensions must be non-negative");
    }

    Index width() const noexcept { return width_; }
    Index height() const noexcept { return height_; }

    double& at(int plane, Index row, Index col)
    {
        return data_[offset(plane, row, col)];
    }
    double at(int plane, Index row, Index col) const
    {
        return data_[offset(plane, row, col)];
    }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const ImageRGB&, const ImageRGB&) = default;

private:
    std::size_t offset(int plane, Index row, Index col) const
    {
        return static_cast<std::size_t>((plane * height_ + row) * width_ + col);
    }

    Index width_ = 0;
    Index height_ = 0;
    std::vector<double> data_;
};

/// Grid of non-overlapping side x side cells; edge remainders are dropped.
struct PatchGrid {
    Index rows = 0;
    Index cols = 0;
    Index side = 0;

    Index cell_count() const noexcept { return rows * cols; }
    /// Top-left pixel (row, col) of cell j in row-major order.
    std::pair<Index, Index> origin(Index cell) const
    {
        return {(cell / cols) * side, (cell % cols) * side};
    }

    friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

inline Index patch_dim(Index side) { return 3 * side * side; }

namespace detail {

inline void skip_ppm_space(const std::string& buf, std::size_t& pos)
{
    while (pos < buf.size()) {
        const char ch = buf[pos];
        if (ch == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            ++pos;
        } else {
            break;
        }
    }
}

inline long read_ppm_int(const std::string& buf, std::size_t& pos, const std::string& path)
{
    skip_ppm_space(buf, pos);
    const std::size_t start = pos;
    long value = 0;
    while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
        value = value * 10 + (buf[pos] - '0');
        require(value < (1L << 24), ErrorCode::malformed_file,
                "PPM header value too large in " + path);
        ++pos;
    }
    require(pos > start, ErrorCode::malformed_file, "malformed PPM header in " + path);
    return value;
}

} // namespace detail

/// Decodes an in-memory binary PPM (P6, maxval 255).
inline ImageRGB decode_ppm(const std::string& buf, const std::string& path = "<memory>")
{
    require(buf.size() >= 2 && buf[0] == 'P', ErrorCode::unsupported_format,
            "unsupported image format: " + path);
    require(buf[1] == '6', ErrorCode::unsupported_format,
            "only binary PPM (P6) is supported: " + path);
    std::size_t pos = 2;
    const long width = detail::read_ppm_int(buf, pos, path);
    const long height = detail::read_ppm_int(buf, pos, path);
    const long maxval = detail::read_ppm_int(buf, pos, path);
    require(width > 0 && height > 0, ErrorCode::malformed_file, "empty PPM image: " + path);
    require(maxval == 255, ErrorCode::unsupported_format,
            "only 8-bit PPM (maxval 255) is supported: " + path);
    require(pos < buf.size(), ErrorCode::malformed_file, "truncated PPM header: " + path);
    ++pos; // single whitespace byte before raster

    const auto pixels = static_cast<std::size_t>(width * height);
    require(buf.size() - pos >= 3 * pixels, ErrorCode::malformed_file,
            "truncated PPM payload: " + path);

    ImageRGB img(width, height);
    for (long r = 0; r < height; ++r)
        for (long c = 0; c < width; ++c)
            for (int p = 0; p < 3; ++p) {
                const auto byte = static_cast<unsigned char>(buf[pos++]);
                img.at(p, r, c) = byte / 255.0;
            }
    return img;
}

inline ImageRGB load_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::file_not_found,
            "cannot open image: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ppm(buf, path.string());
}

/// Writes a P6 PPM; intensities are clamped to [0,1] and rounded to 8 bits.
inline void save_ppm(const ImageRGB& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::unwritable_path,
            "cannot write image: " + path.string());
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::string raster;
    raster.reserve(static_cast<std::size_t>(3 * img.width() * img.height()));
    for (Index r = 0; r < img.height(); ++r)
        for (Index c = 0; c < img.width(); ++c)
            for (int p = 0; p < 3; ++p) {
                const double v = std::clamp(img.at(p, r, c), 0.0, 1.0);
                raster.push_back(static_cast<char>(static_cast<unsigned char>(v * 255.0 + 0.5)));
            }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    require(static_cast<bool>(out), ErrorCode::unwritable_path,
            "failed writing image: " + path.string());
}

/// Copies the side x side patch at (top, left) into `column`.
template <class Column>
void vectorize_patch(const ImageRGB& img, Index top, Index left, Index side, Column&& column)
{
    Index i = 0;
    for (int p = 0; p < 3; ++p)
        for (Index r = 0; r < side; ++r)
            for (Index c = 0; c < side; ++c)
                column(i++) = img.at(p, top + r, left + c);
}

/// Inverse of vectorize_patch.
template <class Column>
void paste_patch(ImageRGB& img, Index top, Index left, Index side, const Column& column)
{
    Index i = 0;
    for (int p = 0; p < 3; ++p)
        for (Index r = 0; r < side; ++r)
            for (Index c = 0; c < side; ++c)
                img.at(p, top + r, left + c) = column(i++);
}

/// Samples `count` patches uniformly over (image, top-left position) pairs,
/// with replacement. Pure function of its arguments.
inline SampleMatrix extract_random_patches(const std::vector<ImageRGB>& images, Index side,
                                           Index count, std::uint64_t seed)
{
    require(side >= 1, ErrorCode::invalid_argument, "patch side must be >= 1");
    require(count >= 1, ErrorCode::invalid_argument, "patch count must be >= 1");
    require(!images.empty(), ErrorCode::invalid_argument, "no images to sample from");

    std::vector<std::uint64_t> cumulative;
    cumulative.reserve(images.size());
    std::uint64_t total = 0;
    for (const auto& img : images) {
        require(img.width() >= side && img.height() >= side, ErrorCode::invalid_argument,
                "image smaller than patch side " + std::to_string(side));
        total += static_cast<std::uint64_t>((img.height() - side + 1) * (img.width() - side + 1));
        cumulative.push_back(total);
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    SampleMatrix Y(patch_dim(side), count);
    for (Index j = 0; j < count; ++j) {
        std::uint64_t u = pick(rng);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto which = static_cast<std::size_t>(it - cumulative.begin());
        if (which > 0) u -= cumulative[which - 1];
        const ImageRGB& img = images[which];
        const auto positions_per_row = static_cast<std::uint64_t>(img.width() - side + 1);
        const auto top = static_cast<Index>(u / positions_per_row);
        const auto left = static_cast<Index>(u % positions_per_row);
        vectorize_patch(img, top, left, side, Y.col(j));
    }
    return Y;
}

struct TiledImage {
    PatchGrid grid;
    SampleMatrix samples;
};

/// Cuts the image into non-overlapping cells; column j is cell
/// (j / cols, j % cols).
inline TiledImage tile_image(const ImageRGB& img, Index side)
{
    require(side >= 1, ErrorCode::invalid_argument, "patch side must be >= 1");
    require(img.width() >= side && img.height() >= side, ErrorCode::invalid_argument,
            "image smaller than patch side " + std::to_string(side));
    TiledImage out;
    out.grid = PatchGrid{img.height() / side, img.width() / side, side};
    out.samples.resize(patch_dim(side), out.grid.cell_count());
    for (Index j = 0; j < out.grid.cell_count(); ++j) {
        const auto [top, left] = out.grid.origin(j);
        vectorize_patch(img, top, left, side, out.samples.col(j));
    }
    return out;
}

/// Rebuilds the cropped image covered by a tiling.
inline ImageRGB assemble_tiles(const PatchGrid& grid, const SampleMatrix& samples)
{
    require(samples.rows() == patch_dim(grid.side) && samples.cols() == grid.cell_count(),
            ErrorCode::dimension_mismatch, "samples do not match patch grid");
    ImageRGB img(grid.cols * grid.side, grid.rows * grid.side);
    for (Index j = 0; j < grid.cell_count(); ++j) {
        const auto [top, left] = grid.origin(j);
        paste_patch(img, top, left, grid.side, samples.col(j));
    }
    return img;
}

/// Indices of all-zero columns (such patches carry no direction).
inline std::vector<Index> zero_columns(const SampleMatrix& Y)
{
    std::vector<Index> out;
    for (Index j = 0; j < Y.cols(); ++j)
        if (Y.col(j).cwiseAbs().maxCoeff() == 0.0) out.push_back(j);
    return out;
}

} // namespace dfdl
