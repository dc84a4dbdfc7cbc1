#pragma once

// `path,label` CSV manifests. Lines starting with '#' and blank lines are
// skipped; CRLF and LF are both accepted; relative paths resolve against the
// manifest's own directory.

#include <dfdl/common.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace dfdl {

struct ManifestEntry {
    std::filesystem::path path;
    std::string label;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    /// Distinct labels in first-appearance order.
    std::vector<std::string> labels() const
    {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
        return out;
    }

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::optional<std::vector<std::string>>& declared = std::nullopt)
{
    Manifest m;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;

        if (!header_seen) {
            require(line == "path,label", ErrorCode::malformed_file,
                    "manifest header must be exactly 'path,label' (line " +
                        std::to_string(line_no) + ")");
            header_seen = true;
            continue;
        }
        const auto comma = line.rfind(',');
        require(comma != std::string::npos && comma > 0 && comma + 1 < line.size(),
                ErrorCode::malformed_file,
                "manifest line " + std::to_string(line_no) + " is not 'path,label'");
        ManifestEntry entry;
        entry.path = line.substr(0, comma);
        entry.label = line.substr(comma + 1);
        if (entry.path.is_relative()) entry.path = base_dir / entry.path;
        if (declared) {
            require(std::find(declared->begin(), declared->end(), entry.label) != declared->end(),
                    ErrorCode::unknown_label,
                    "unknown label '" + entry.label + "' on manifest line " +
                        std::to_string(line_no));
        }
        m.entries.push_back(std::move(entry));
    }
    require(header_seen, ErrorCode::malformed_file, "manifest is empty or missing its header");
    require(!m.entries.empty(), ErrorCode::malformed_file, "manifest has no entries");
    if (declared) {
        for (const auto& label : *declared) {
            const bool present = std::any_of(m.entries.begin(), m.entries.end(),
                                             [&](const auto& e) { return e.label == label; });
            require(present, ErrorCode::malformed_file,
                    "declared label '" + label + "' has no manifest entry");
        }
    }
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& path,
                              const std::optional<std::vector<std::string>>& declared = std::nullopt)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::file_not_found,
            "cannot open manifest: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path.parent_path(), declared);
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::unwritable_path,
            "cannot write manifest: " + path.string());
    out << "path,label\n";
    for (const auto& e : m.entries) out << e.path.generic_string() << ',' << e.label << '\n';
}

} // namespace dfdl
