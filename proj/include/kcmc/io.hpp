#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcmc/errors.hpp"
#include "kcmc/foliation.hpp"
#include "kcmc/report.hpp"
#include "kcmc/slice.hpp"
#include "kcmc/tolerances.hpp"

namespace kcmc {

using json = nlohmann::json;

class IoError : public Error {
public:
    using Error::Error;
};

// %.17g: enough digits to round-trip any binary64 value.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw IoError("not a number: '" + text + "'");
    return v;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kSliceCsvHeader = "X,T,r,region,c,H";

inline void write_slice_csv(std::ostream& os, const Hypersurface& s) {
    os << kSliceCsvHeader << '\n';
    const std::string c = format_double(s.params.c);
    const std::string H = format_double(s.params.H);
    for (const auto& pt : s.samples) {
        os << format_double(pt.X) << ',' << format_double(pt.T) << ',' << format_double(pt.r)
           << ',' << to_string(pt.region) << ',' << c << ',' << H << '\n';
    }
}

/// Samples and (c, H) from a slice CSV. The CSV carries no mass, kind or
/// family; those come from `M` and the sign of the intercept.
inline Hypersurface read_slice_csv(std::istream& is, double M = 1.0) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("read_slice_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSliceCsvHeader) throw IoError("read_slice_csv: unexpected header '" + line + "'");
    Hypersurface s;
    s.params.M = M;
    s.generator = SliceGenerator::IVP;
    bool first = true;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 6) {
            throw IoError("read_slice_csv: row " + std::to_string(row) + " has " +
                          std::to_string(cols.size()) + " columns");
        }
        SlicePoint pt;
        pt.X = parse_double(cols[0]);
        pt.T = parse_double(cols[1]);
        pt.r = parse_double(cols[2]);
        pt.region = region_from_string(cols[3]);
        if (first) {
            s.params.c = parse_double(cols[4]);
            s.params.H = parse_double(cols[5]);
            first = false;
        }
        s.samples.push_back(pt);
    }
    if (s.samples.empty()) throw IoError("read_slice_csv: no samples");
    const auto axis = std::min_element(s.samples.begin(), s.samples.end(),
                                       [](const SlicePoint& a, const SlicePoint& b) {
                                           return std::abs(a.X) < std::abs(b.X);
                                       });
    s.t_intercept = axis->T;
    s.family = axis->T > 0 ? Family::Upper : Family::Lower;
    return s;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json slice_to_json(const Hypersurface& s) {
    json samples = json::array();
    for (const auto& pt : s.samples) {
        samples.push_back({{"X", pt.X}, {"T", pt.T}, {"r", pt.r}, {"region", to_string(pt.region)}});
    }
    json j = {{"M", s.params.M},
              {"H", s.params.H},
              {"c", s.params.c},
              {"kind", to_string(s.kind)},
              {"family", to_string(s.family)},
              {"generator", to_string(s.generator)},
              {"T_intercept", s.t_intercept},
              {"grading", s.grading},
              {"samples", samples}};
    if (!s.slopes.empty()) j["slopes"] = s.slopes;
    return j;
}

inline Hypersurface slice_from_json(const json& j) {
    try {
        Hypersurface s;
        s.params = {j.at("M").get<double>(), j.at("H").get<double>(), j.at("c").get<double>()};
        s.kind = slice_kind_from_string(j.at("kind").get<std::string>());
        s.family = j.at("family").get<std::string>() == "upper" ? Family::Upper : Family::Lower;
        s.generator = j.at("generator").get<std::string>() == "quadrature" ? SliceGenerator::Quadrature
                                                                          : SliceGenerator::IVP;
        s.t_intercept = j.at("T_intercept").get<double>();
        s.grading = j.value("grading", 0.0);
        for (const auto& pt : j.at("samples")) {
            s.samples.push_back({pt.at("X").get<double>(), pt.at("T").get<double>(),
                                 pt.at("r").get<double>(),
                                 region_from_string(pt.at("region").get<std::string>())});
        }
        if (j.contains("slopes")) s.slopes = j.at("slopes").get<std::vector<double>>();
        return s;
    } catch (const json::exception& e) {
        throw IoError(std::string("slice_from_json: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Foliation index
// ---------------------------------------------------------------------------

struct IndexEntry {
    double c = 0.0;
    double H = 0.0;
    double r = 0.0;
    LeafBranch branch = LeafBranch::Maximal;
    Family family = Family::Lower;
    double T_intercept = 0.0;
    std::string file;
};

struct FoliationIndex {
    double M = 1.0;
    FoliationCurve curve;
    std::vector<IndexEntry> leaves;  // ascending c
};

inline json index_to_json(const FoliationIndex& index) {
    json leaves = json::array();
    for (const auto& e : index.leaves) {
        leaves.push_back({{"c", e.c},
                          {"H", e.H},
                          {"r", e.r},
                          {"branch", to_string(e.branch)},
                          {"family", to_string(e.family)},
                          {"T_intercept", e.T_intercept},
                          {"file", e.file}});
    }
    return {{"M", index.M},
            {"curve", {{"p", index.curve.p}, {"C", index.curve.C}, {"A", index.curve.A}}},
            {"leaves", leaves}};
}

inline FoliationIndex index_from_json(const json& j) {
    try {
        FoliationIndex index;
        index.M = j.at("M").get<double>();
        const auto& curve = j.at("curve");
        index.curve = {index.M, curve.at("p").get<double>(), curve.at("C").get<double>(),
                       curve.at("A").get<double>()};
        for (const auto& e : j.at("leaves")) {
            IndexEntry entry;
            entry.c = e.at("c").get<double>();
            entry.H = e.at("H").get<double>();
            entry.r = e.at("r").get<double>();
            entry.branch = leaf_branch_from_string(e.at("branch").get<std::string>());
            entry.family = e.value("family", std::string("lower")) == "upper" ? Family::Upper
                                                                            : Family::Lower;
            entry.T_intercept = e.at("T_intercept").get<double>();
            entry.file = e.at("file").get<std::string>();
            index.leaves.push_back(entry);
        }
        return index;
    } catch (const json::exception& e) {
        throw IoError(std::string("index_from_json: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Verification report
// ---------------------------------------------------------------------------

inline json report_to_json(const VerificationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        json worst = std::isfinite(c.worst_value) ? json(c.worst_value) : json(format_double(c.worst_value));
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"worst_value", worst},
                          {"worst_location", c.worst_location},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    }
    return {{"pass", report.pass()}, {"checks", checks}};
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct PlotOptions {
    double half_width = 3.2;  // world units shown on each side of the origin
    int pixels = 800;
    std::size_t max_points_per_leaf = 600;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Diverging scale: blue for H < 0, red for H > 0, grey at H = 0. |H| spans
// many decades across a family, so the intensity is logarithmic above 1e-3.
inline std::string h_color(double H, double H_scale) {
    constexpr double h0 = 1e-3;
    double u = H_scale > 0 ? std::asinh(H / h0) / std::asinh(H_scale / h0) : 0.0;
    u = std::clamp(u, -1.0, 1.0);
    const double a = std::sqrt(std::abs(u));
    const double base = 190.0;
    int red;
    int green;
    int blue;
    if (u < 0) {
        red = static_cast<int>(std::lround(base * (1.0 - a) + 33.0 * a));
        green = static_cast<int>(std::lround(base * (1.0 - a) + 102.0 * a));
        blue = static_cast<int>(std::lround(base * (1.0 - a) + 172.0 * a));
    } else {
        red = static_cast<int>(std::lround(base * (1.0 - a) + 178.0 * a));
        green = static_cast<int>(std::lround(base * (1.0 - a) + 24.0 * a));
        blue = static_cast<int>(std::lround(base * (1.0 - a) + 43.0 * a));
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, blue);
    return buf;
}

}  // namespace detail

/// Kruskal diagram: r = 0 hyperbolae, horizons, and one polyline per leaf.
inline void write_svg(std::ostream& os, std::span<const Hypersurface> leaves, double M,
                      const PlotOptions& options = {}) {
    const double L = options.half_width * M;
    const double px = static_cast<double>(options.pixels);
    const double scale = px / (2.0 * L);
    auto sx = [&](double X) { return detail::svg_num(0.5 * px + X * scale); };
    auto sy = [&](double T) { return detail::svg_num(0.5 * px - T * scale); };

    double H_scale = 0.0;
    for (const auto& s : leaves) H_scale = std::max(H_scale, std::abs(s.params.H));

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.pixels
       << "\" height=\"" << options.pixels << "\" viewBox=\"0 0 " << options.pixels << ' '
       << options.pixels << "\">\n";
    os << "<rect id=\"background\" x=\"0\" y=\"0\" width=\"" << options.pixels << "\" height=\""
       << options.pixels << "\" fill=\"white\"/>\n";

    os << "<g id=\"singularities\" fill=\"none\" stroke=\"black\" stroke-width=\"2\">\n";
    for (int sign : {1, -1}) {
        os << "<polyline id=\"singularity-" << (sign > 0 ? "future" : "past") << "\" points=\"";
        for (int i = 0; i <= 200; ++i) {
            const double X = -L + 2.0 * L * i / 200.0;
            const double T = sign * std::sqrt(X * X + 2.0 * M);
            if (std::abs(T) > L) continue;
            os << sx(X) << ',' << sy(T) << ' ';
        }
        os << "\"/>\n";
    }
    os << "</g>\n";

    os << "<g id=\"horizons\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"6,4\">\n";
    os << "<line id=\"horizon-1\" x1=\"" << sx(-L) << "\" y1=\"" << sy(-L) << "\" x2=\"" << sx(L)
       << "\" y2=\"" << sy(L) << "\"/>\n";
    os << "<line id=\"horizon-2\" x1=\"" << sx(-L) << "\" y1=\"" << sy(L) << "\" x2=\"" << sx(L)
       << "\" y2=\"" << sy(-L) << "\"/>\n";
    os << "</g>\n";

    os << "<g id=\"leaves\" fill=\"none\" stroke-width=\"1.2\">\n";
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        const auto& pts = leaves[k].samples;
        char id[32];
        std::snprintf(id, sizeof id, "leaf-%04zu", k);
        os << "<polyline id=\"" << id << "\" stroke=\"" << detail::h_color(leaves[k].params.H, H_scale)
           << "\" data-c=\"" << format_double(leaves[k].params.c) << "\" data-H=\""
           << format_double(leaves[k].params.H) << "\" points=\"";
        const std::size_t stride =
            std::max<std::size_t>(1, (pts.size() + options.max_points_per_leaf - 1) /
                                         std::max<std::size_t>(1, options.max_points_per_leaf));
        for (std::size_t i = 0; i < pts.size(); i += stride) {
            os << sx(pts[i].X) << ',' << sy(pts[i].T) << ' ';
        }
        if (!pts.empty() && (pts.size() - 1) % stride != 0) {
            os << sx(pts.back().X) << ',' << sy(pts.back().T);
        }
        os << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    double M = 1.0;
    double p = 2.0;
    std::optional<double> C = 12.0;  // nullopt: default_amplitude(p, M)
    double A = 0.0;
    std::vector<double> c_list;
    std::optional<double> c_min;
    std::optional<double> c_max;
    std::optional<int> count;
    double X_max = 3.0;
    std::size_t samples_per_side = 801;
    Tolerances tol;
    std::string format = "csv";
    std::string path;

    void validate() const {
        if (!(M > 0) || !std::isfinite(M)) throw DomainError("config: M must be positive");
        if (!(X_max > 0) || !std::isfinite(X_max)) throw DomainError("config: X_max must be positive");
        if (samples_per_side < 2) throw DomainError("config: samples_per_side must be >= 2");
        if (count && *count < 1) throw DomainError("config: count must be >= 1");
        if (c_min.has_value() != c_max.has_value()) {
            throw DomainError("config: c_min and c_max must be given together");
        }
        if (c_min && !(*c_min <= *c_max)) throw DomainError("config: c_min must not exceed c_max");
        if (format != "csv" && format != "json") throw DomainError("config: format must be csv or json");
        tol.validate();
        curve().validate();
    }

    FoliationCurve curve() const {
        return {M, p, C ? *C * M * M * M : default_amplitude(p, M), A};
    }

    std::vector<double> c_values() const {
        std::vector<double> out;
        if (!c_list.empty()) {
            out = c_list;
        } else if (c_min) {
            const int n = count.value_or(41);
            for (int i = 0; i < n; ++i) {
                out.push_back(n == 1 ? *c_min : *c_min + (*c_max - *c_min) * i / (n - 1.0));
            }
        } else {
            out = default_c_grid(M, count ? static_cast<std::size_t>(std::max(1, (*count - 1) / 2)) : 20);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    SliceOptions slice_options() const {
        SliceOptions o;
        o.samples_per_side = samples_per_side;
        o.tol = tol;
        return o;
    }
};

/// Merges a JSON config object into `cfg` (keys absent from the file keep
/// their current values).
inline void merge_config(RunConfig& cfg, const json& j) {
    try {
        if (j.contains("M")) cfg.M = j.at("M").get<double>();
        if (j.contains("curve")) {
            const auto& c = j.at("curve");
            if (c.contains("p")) cfg.p = c.at("p").get<double>();
            if (c.contains("C")) {
                if (c.at("C").is_string()) {
                    if (c.at("C").get<std::string>() != "auto") throw IoError("config: curve.C must be a number or \"auto\"");
                    cfg.C.reset();
                } else {
                    cfg.C = c.at("C").get<double>();
                }
            }
            if (c.contains("A")) cfg.A = c.at("A").get<double>();
        }
        if (j.contains("grids")) {
            const auto& g = j.at("grids");
            if (g.contains("c_list")) cfg.c_list = g.at("c_list").get<std::vector<double>>();
            if (g.contains("c_min")) cfg.c_min = g.at("c_min").get<double>();
            if (g.contains("c_max")) cfg.c_max = g.at("c_max").get<double>();
            if (g.contains("count")) cfg.count = g.at("count").get<int>();
            if (g.contains("X_max")) cfg.X_max = g.at("X_max").get<double>();
            if (g.contains("samples_per_side")) cfg.samples_per_side = g.at("samples_per_side").get<std::size_t>();
        }
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            if (t.contains("root")) cfg.tol.root = t.at("root").get<double>();
            if (t.contains("quad")) cfg.tol.quad = t.at("quad").get<double>();
            if (t.contains("ode")) cfg.tol.ode = t.at("ode").get<double>();
            if (t.contains("coord")) cfg.tol.coord = t.at("coord").get<double>();
            if (t.contains("resid")) cfg.tol.resid = t.at("resid").get<double>();
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            if (o.contains("format")) cfg.format = o.at("format").get<std::string>();
            if (o.contains("path")) cfg.path = o.at("path").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("config: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("invalid JSON in '" + path + "': " + e.what());
    }
}

}  // namespace kcmc
