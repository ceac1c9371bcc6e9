#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marsft/core.hpp"

namespace marsft::csv {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

/// Writes next to the target then renames, so readers never see half a file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".part";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

/// A table with `# key: value` comment lines ahead of the header.
struct Table {
    std::vector<std::pair<std::string, std::string>> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::ostringstream o;
        for (const auto& [k, v] : comments) o << "# " << k << ": " << v << "\n";
        for (std::size_t i = 0; i < header.size(); ++i) o << (i ? "," : "") << header[i];
        o << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
            o << "\n";
        }
        return o.str();
    }
};

inline Table psd_table(const SpectralDensity& psd, bool with_dbc = false) {
    Table t;
    t.header = {"freq_hz", "sphi_rad2_per_hz"};
    if (with_dbc) t.header.push_back("ssb_dbc_per_hz");
    for (std::size_t i = 0; i < psd.size(); ++i) {
        std::vector<std::string> r{num(psd.freqs[i]), num(psd.values[i])};
        if (with_dbc) r.push_back(num(sphi_to_ssb_dbc(psd.values[i])));
        t.rows.push_back(std::move(r));
    }
    return t;
}

/// n_samples is blank for curves converted from a PSD.
inline Table adev_table(const AdevCurve& curve) {
    Table t;
    t.header = {"tau_s", "adev", "n_samples"};
    for (std::size_t i = 0; i < curve.size(); ++i)
        t.rows.push_back({num(curve.taus[i]), num(curve.sigmas[i]),
                          i < curve.sample_counts.size() ? std::to_string(curve.sample_counts[i]) : std::string{}});
    return t;
}

/// Parsed file: comments, header, raw cells and their numeric reading (NaN when blank or text).
struct ParsedTable {
    std::vector<std::pair<std::string, std::string>> comments;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<std::string>> cells;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw IoError("missing column '" + name + "'");
    }

    std::string comment(const std::string& key) const {
        for (const auto& [k, v] : comments)
            if (k == key) return v;
        return {};
    }
};

inline ParsedTable parse_table(const std::string& text, const std::string& origin = "<csv>") {
    ParsedTable t;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(": ");
            if (colon != std::string::npos) t.comments.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size())
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " cells");
        std::vector<double> r;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double x = std::strtod(c.c_str(), &end);
            r.push_back(!c.empty() && end == c.c_str() + c.size() ? x : std::numeric_limits<double>::quiet_NaN());
        }
        t.rows.push_back(std::move(r));
        t.cells.push_back(std::move(cells));
    }
    if (t.header.empty()) throw IoError(origin + ": no header line");
    return t;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline SpectralDensity read_psd(const std::filesystem::path& path) {
    const auto t = parse_table(read_file(path), path.string());
    const auto fi = t.column("freq_hz"), si = t.column("sphi_rad2_per_hz");
    SpectralDensity psd;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (std::isnan(r[fi]) || std::isnan(r[si]))
            throw IoError(path.string() + ": row " + std::to_string(i + 1) + " is not numeric");
        psd.freqs.push_back(r[fi]);
        psd.values.push_back(r[si]);
    }
    try {
        psd.check();
    } catch (const ModelError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return psd;
}

}  // namespace marsft::csv
