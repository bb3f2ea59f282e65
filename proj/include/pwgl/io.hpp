#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "classify.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "rng.hpp"

namespace pwgl {

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw DataError(where + ": cannot parse number '" + t + "'");
    }
    if (pos != t.size()) throw DataError(where + ": trailing characters in number '" + t + "'");
    return v;
}

inline long long parse_int(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &pos);
    } catch (const std::exception&) {
        throw DataError(where + ": cannot parse integer '" + t + "'");
    }
    if (pos != t.size()) throw DataError(where + ": trailing characters in integer '" + t + "'");
    return v;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Point clouds as CSV

/// Header x_1..x_d,label_class,label_value; unlabeled rows carry -1 and an empty value.
inline void save_points_csv(const PointCloud& cloud, std::ostream& out) {
    for (std::size_t k = 0; k < cloud.dim(); ++k) out << "x_" << (k + 1) << ',';
    out << "label_class,label_value\n";
    std::vector<long> label_of(cloud.size(), -1);
    for (std::size_t k = 0; k < cloud.label_count(); ++k) label_of[cloud.label_indices()[k]] = static_cast<long>(k);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (double v : cloud.point(i)) out << format_double(v) << ',';
        if (label_of[i] < 0) {
            out << "-1,\n";
        } else {
            const auto k = static_cast<std::size_t>(label_of[i]);
            out << cloud.label_classes()[k] << ',' << format_double(cloud.label_values()[k]) << '\n';
        }
    }
}

/// Reads the format written by save_points_csv; the two label columns are optional.
/// A row is labeled when label_value is non-empty.
inline PointCloud load_points_csv(std::istream& in, const std::string& name = "points.csv") {
    std::string line;
    if (!std::getline(in, line)) throw DataError(name + ": empty file");
    const auto header = detail::split_csv(line);
    std::size_t dim = 0;
    while (dim < header.size() && detail::trim(header[dim]) == "x_" + std::to_string(dim + 1)) ++dim;
    if (dim == 0) throw DataError(name + ": header must start with x_1");
    long class_col = -1, value_col = -1;
    for (std::size_t c = dim; c < header.size(); ++c) {
        const auto h = detail::trim(header[c]);
        if (h == "label_class") class_col = static_cast<long>(c);
        else if (h == "label_value") value_col = static_cast<long>(c);
        else throw DataError(name + ": unknown column '" + h + "'");
    }
    PointCloud cloud(dim);
    std::vector<double> x(dim);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line);
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != header.size())
            throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, found " +
                            std::to_string(cells.size()));
        for (std::size_t k = 0; k < dim; ++k) {
            x[k] = detail::parse_double(cells[k], where);
            if (!std::isfinite(x[k])) throw DataError(where + ": coordinates must be finite");
        }
        const NodeIndex i = cloud.add_point(x);
        const std::string value = value_col >= 0 ? detail::trim(cells[static_cast<std::size_t>(value_col)]) : "";
        int cls = -1;
        if (class_col >= 0) cls = static_cast<int>(detail::parse_int(cells[static_cast<std::size_t>(class_col)], where));
        if (!value.empty()) cloud.add_label(i, detail::parse_double(value, where), cls);
        else if (cls >= 0) cloud.add_label(i, static_cast<double>(cls), cls);
    }
    return cloud;
}

inline PointCloud load_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return load_points_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// MNIST IDX

struct IdxDataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels; // count * rows * cols
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t pixel_count() const noexcept { return rows * cols; }

    /// Intensities scaled to [0, 1].
    PointCloud to_cloud() const {
        PointCloud cloud(pixel_count());
        std::vector<double> x(pixel_count());
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = pixels[i * x.size() + k] / 255.0;
            cloud.add_point(x);
        }
        return cloud;
    }

    void append(const IdxDataset& other) {
        if (size() == 0) {
            *this = other;
            return;
        }
        if (other.rows != rows || other.cols != cols) throw DataError("IDX files have different image shapes");
        pixels.insert(pixels.end(), other.pixels.begin(), other.pixels.end());
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    }

    /// k items drawn uniformly without replacement, kept in their original order.
    IdxDataset subsample(std::size_t k, std::uint64_t seed) const {
        if (k > size()) throw ConfigError("subsample of " + std::to_string(k) + " exceeds dataset size " + std::to_string(size()));
        CounterRng rng(seed);
        auto idx = sample_without_replacement(size(), k, rng);
        std::sort(idx.begin(), idx.end());
        IdxDataset out;
        out.rows = rows;
        out.cols = cols;
        for (std::size_t i : idx) {
            out.pixels.insert(out.pixels.end(), pixels.begin() + static_cast<std::ptrdiff_t>(i * pixel_count()),
                              pixels.begin() + static_cast<std::ptrdiff_t>((i + 1) * pixel_count()));
            out.labels.push_back(labels[i]);
        }
        return out;
    }
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset, const std::string& name) {
    if (buf.size() < offset + 4)
        throw DataError(name + ": truncated header at byte offset " + std::to_string(offset) + " (file has " +
                        std::to_string(buf.size()) + " bytes)");
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

} // namespace detail

/// Parses an image file (magic 2051) and a label file (magic 2049) held in memory.
inline IdxDataset parse_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels,
                            const std::string& image_name = "images", const std::string& label_name = "labels") {
    const auto magic_i = detail::read_be32(images, 0, image_name);
    if (magic_i != 2051)
        throw DataError(image_name + ": bad magic " + std::to_string(magic_i) + " at byte offset 0 (expected 2051)");
    const auto magic_l = detail::read_be32(labels, 0, label_name);
    if (magic_l != 2049)
        throw DataError(label_name + ": bad magic " + std::to_string(magic_l) + " at byte offset 0 (expected 2049)");
    IdxDataset ds;
    const std::size_t count = detail::read_be32(images, 4, image_name);
    ds.rows = detail::read_be32(images, 8, image_name);
    ds.cols = detail::read_be32(images, 12, image_name);
    const std::size_t label_count = detail::read_be32(labels, 4, label_name);
    if (count != label_count)
        throw DataError("image count " + std::to_string(count) + " does not match label count " + std::to_string(label_count));
    const std::size_t image_bytes = 16 + count * ds.rows * ds.cols;
    if (images.size() != image_bytes)
        throw DataError(image_name + ": expected " + std::to_string(image_bytes) + " bytes, found " +
                        std::to_string(images.size()) + (images.size() < image_bytes ? " (truncated at byte offset " + std::to_string(images.size()) + ")" : ""));
    if (labels.size() != 8 + count)
        throw DataError(label_name + ": expected " + std::to_string(8 + count) + " bytes, found " +
                        std::to_string(labels.size()) + (labels.size() < 8 + count ? " (truncated at byte offset " + std::to_string(labels.size()) + ")" : ""));
    ds.pixels.assign(images.begin() + 16, images.end());
    ds.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int v = labels[8 + i];
        if (v > 9) throw DataError(label_name + ": label " + std::to_string(v) + " out of range at byte offset " + std::to_string(8 + i));
        ds.labels[i] = v;
    }
    return ds;
}

inline IdxDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
    return parse_idx(detail::read_file(images), detail::read_file(labels), images.string(), labels.string());
}

/// Writes an IDX pair (used for fixtures).
inline void save_idx(const IdxDataset& ds, const std::filesystem::path& images, const std::filesystem::path& labels) {
    auto be32 = [](std::ofstream& out, std::uint32_t v) {
        const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8), static_cast<char>(v)};
        out.write(b, 4);
    };
    std::ofstream im(images, std::ios::binary), lb(labels, std::ios::binary);
    if (!im || !lb) throw DataError("cannot write IDX files");
    be32(im, 2051);
    be32(im, static_cast<std::uint32_t>(ds.size()));
    be32(im, static_cast<std::uint32_t>(ds.rows));
    be32(im, static_cast<std::uint32_t>(ds.cols));
    im.write(reinterpret_cast<const char*>(ds.pixels.data()), static_cast<std::streamsize>(ds.pixels.size()));
    be32(lb, 2049);
    be32(lb, static_cast<std::uint32_t>(ds.size()));
    for (int l : ds.labels) lb.put(static_cast<char>(l));
}

// ---------------------------------------------------------------------------
// Config files: [section] headers, key = value lines, '#' comments

class Config {
public:
    Config() = default;

    static Config parse(std::istream& in, const std::string& name = "config") {
        Config cfg;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const std::string where = name + ":" + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + ": malformed section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            if (key.empty()) throw ConfigError(where + ": empty key");
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.values_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
            cfg.values_[full] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path.string());
        return parse(in, path.string());
    }

    /// Later values win (flag overrides on top of a file).
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }
    std::string get(const std::string& key, const std::string& fallback) {
        return take(key).value_or(fallback);
    }
    double get(const std::string& key, double fallback) {
        auto v = take(key);
        return v ? config_double(*v, key) : fallback;
    }
    std::size_t get(const std::string& key, std::size_t fallback) {
        auto v = take(key);
        if (!v) return fallback;
        const double d = config_double(*v, key);
        if (d < 0 || d != std::floor(d)) throw ConfigError(key + ": expected a nonnegative integer, got '" + *v + "'");
        return static_cast<std::size_t>(d);
    }
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
        auto v = take(key);
        if (!v) return fallback;
        try {
            if (v->empty() || !std::isdigit(static_cast<unsigned char>(v->front()))) throw std::invalid_argument("sign");
            std::size_t pos = 0;
            const auto s = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing");
            return s;
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected an unsigned integer, got '" + *v + "'");
        }
    }
    bool get(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
    }

    /// Throws on any key that was never read.
    void reject_unknown() const {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError("unknown config key '" + k + "'");
    }

    static double config_double(const std::string& v, const std::string& key) {
        try {
            return detail::parse_double(v, key);
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

/// zeta = <number> | scaled:<c> | {"scaled": c}
inline ZetaRule parse_zeta(const std::string& text) {
    const std::string t = detail::trim(text);
    if (t.rfind("scaled:", 0) == 0) return {Config::config_double(t.substr(7), "zeta"), true};
    if (!t.empty() && t.front() == '{') {
        try {
            const auto j = nlohmann::json::parse(t);
            if (j.size() == 1 && j.contains("scaled")) return {j["scaled"].get<double>(), true};
        } catch (const nlohmann::json::exception&) {
        }
        throw ConfigError("zeta: expected a number, scaled:<c> or {\"scaled\": c}, got '" + t + "'");
    }
    return {Config::config_double(t, "zeta"), false};
}

/// gamma_variant = truncated | two_region:<r> | {"two_region": r}
inline std::variant<TruncatedVariant, TwoRegionVariant> parse_gamma_variant(const std::string& text) {
    const std::string t = detail::trim(text);
    if (t == "truncated") return TruncatedVariant{};
    if (t.rfind("two_region:", 0) == 0) return TwoRegionVariant{Config::config_double(t.substr(11), "gamma_variant")};
    if (!t.empty() && t.front() == '{') {
        try {
            const auto j = nlohmann::json::parse(t);
            if (j.size() == 1 && j.contains("two_region")) return TwoRegionVariant{j["two_region"].get<double>()};
        } catch (const nlohmann::json::exception&) {
        }
    }
    throw ConfigError("gamma_variant: expected truncated, two_region:<r> or {\"two_region\": r}, got '" + t + "'");
}

inline KernelProfile parse_kernel(const std::string& name, double sigma_factor, double support) {
    KernelProfile k;
    if (name == "indicator") k = KernelProfile::indicator();
    else if (name == "gaussian") k = KernelProfile::gaussian(sigma_factor, support);
    else throw ConfigError("kernel: expected indicator or gaussian, got '" + name + "'");
    k.validate();
    return k;
}

/// eps = auto | <number>; auto maps to 0 (the experiment's own rule).
inline double parse_eps(const std::string& text) {
    if (detail::trim(text) == "auto") return 0.0;
    const double v = Config::config_double(text, "eps");
    if (!(v > 0.0)) throw ConfigError("eps must be positive or auto");
    return v;
}

// ---------------------------------------------------------------------------
// Artifacts

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// node, x_1..x_d, one column per method (u_<method>).
inline void write_field_csv(std::ostream& out, const PointCloud& cloud, const std::vector<FieldColumn>& field) {
    out << "node";
    for (std::size_t k = 0; k < cloud.dim(); ++k) out << ",x_" << (k + 1);
    for (const auto& c : field) out << ",u_" << c.name;
    out << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << i;
        for (double v : cloud.point(i)) out << ',' << format_double(v);
        for (const auto& c : field) out << ',' << format_double(c.values[i]);
        out << '\n';
    }
}

inline void write_boundary_csv(std::ostream& out, const std::vector<BoundaryRow>& rows, std::size_t dim) {
    out << "trial,method,node";
    for (std::size_t k = 0; k < dim; ++k) out << ",x_" << (k + 1);
    out << ",u\n";
    for (const auto& r : rows) {
        out << r.trial << ',' << r.method << ',' << r.node;
        for (double v : r.coords) out << ',' << format_double(v);
        out << ',' << format_double(r.u) << '\n';
    }
}

/// report.json, field.csv and (when present) boundary.csv in `dir`.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentReport& rep, const Json& extra = {}) {
    std::filesystem::create_directories(dir);
    Json j = rep.to_json();
    if (!extra.is_null())
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_json(dir / "report.json", j);
    if (!rep.field.empty()) {
        std::ostringstream s;
        write_field_csv(s, rep.field_cloud, rep.field);
        write_text(dir / "field.csv", s.str());
    }
    if (!rep.boundary.empty()) {
        std::ostringstream s;
        write_boundary_csv(s, rep.boundary, rep.field_cloud.dim());
        write_text(dir / "boundary.csv", s.str());
    }
}

inline void write_prediction_csv(std::ostream& out, const Prediction& pred) {
    out << "node,pred_class";
    for (std::size_t c = 0; c < pred.class_count(); ++c) out << ",score_" << c;
    out << '\n';
    for (std::size_t i = 0; i < pred.size(); ++i) {
        out << i << ',' << pred.label[i];
        for (std::size_t c = 0; c < pred.class_count(); ++c) out << ',' << format_double(pred.scores[c][i]);
        out << '\n';
    }
}

inline Json classification_summary(const Prediction& pred, const std::vector<int>& truth, std::size_t class_count,
                                   const std::vector<char>& labeled) {
    Json j;
    const double acc = accuracy(pred.label, truth, labeled);
    j["accuracy"] = acc;
    j["error_rate"] = 1.0 - acc;
    Json per = Json::array();
    for (double a : per_class_accuracy(pred.label, truth, class_count, labeled)) {
        if (std::isnan(a)) per.push_back(nullptr);
        else per.push_back(a);
    }
    j["per_class_accuracy"] = per;
    Json reports = Json::array();
    for (const auto& r : pred.reports) reports.push_back(solve_report_json(r));
    j["solves"] = reports;
    return j;
}

} // namespace pwgl
