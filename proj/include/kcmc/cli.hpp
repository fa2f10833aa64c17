#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcmc/foliation.hpp"
#include "kcmc/io.hpp"
#include "kcmc/slice.hpp"
#include "kcmc/verify.hpp"

namespace kcmc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verification failure or computation failure
inline constexpr int kExitInvalid = 2;  // invalid input, missing files, no such slice

namespace cli {

// Flag values; unset optionals fall back to the config file, then defaults.
struct Flags {
    std::optional<double> M;
    std::string config;
    std::string out;
    std::optional<double> tol_root, tol_quad, tol_ode, tol_coord, tol_resid;

    std::optional<double> p, A;
    std::optional<std::string> C;
    std::optional<double> xmax;
    std::optional<std::size_t> samples;
    std::optional<std::string> format;

    // slice
    std::optional<double> H;
    double c = 0.0;
    std::optional<std::string> branch;
    std::optional<std::string> family;

    // foliation
    std::vector<double> c_list;
    std::optional<double> c_min, c_max;
    std::optional<int> count;

    // locate
    double T = 0.0;
    double X = 0.0;

    // verify
    std::string suite = "all";
    std::string report;
    std::optional<std::size_t> points;

    // plot
    std::string index;
    std::vector<std::string> slice_files;
    bool mo_family = false;
    double half_width = 3.2;
};

inline RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) merge_config(cfg, read_json_file(f.config));
    if (f.M) cfg.M = *f.M;
    if (f.p) cfg.p = *f.p;
    if (f.A) cfg.A = *f.A;
    if (f.C) {
        if (*f.C == "auto") {
            cfg.C.reset();
        } else {
            try {
                cfg.C = parse_double(*f.C);
            } catch (const IoError&) {
                throw DomainError("--C must be a number or 'auto'");
            }
        }
    }
    if (f.xmax) cfg.X_max = *f.xmax;
    if (f.samples) cfg.samples_per_side = *f.samples;
    if (f.format) cfg.format = *f.format;
    if (!f.c_list.empty()) cfg.c_list = f.c_list;
    if (f.c_min) cfg.c_min = f.c_min;
    if (f.c_max) cfg.c_max = f.c_max;
    if (f.count) cfg.count = f.count;
    if (f.tol_root) cfg.tol.root = *f.tol_root;
    if (f.tol_quad) cfg.tol.quad = *f.tol_quad;
    if (f.tol_ode) cfg.tol.ode = *f.tol_ode;
    if (f.tol_coord) cfg.tol.coord = *f.tol_coord;
    if (f.tol_resid) cfg.tol.resid = *f.tol_resid;
    if (!f.out.empty()) cfg.path = f.out;
    cfg.validate();
    return cfg;
}

inline void emit_slice(std::ostream& os, const Hypersurface& s, const std::string& format) {
    if (format == "json") {
        os << slice_to_json(s).dump(1) << '\n';
    } else {
        write_slice_csv(os, s);
    }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

inline Hypersurface read_slice_file(const std::filesystem::path& path, double M) {
    if (!std::filesystem::exists(path)) throw IoError("missing input file '" + path.string() + "'");
    if (path.extension() == ".json") return slice_from_json(read_json_file(path.string()));
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_slice_csv(in, M);
}

inline int cmd_slice(const Flags& f, std::ostream& out) {
    const RunConfig cfg = resolve(f);
    const SliceOptions opts = cfg.slice_options();
    Hypersurface s;
    if (f.H) {
        const SliceParams p{cfg.M, *f.H, f.c};
        p.validate();
        std::optional<Family> family;
        if (f.family) family = *f.family == "upper" ? Family::Upper : Family::Lower;
        const Family fam = family.value_or(default_family(p));
        Branch branch = Branch::Minus;
        if (f.branch) {
            branch = *f.branch == "plus" ? Branch::Plus : Branch::Minus;
        } else {
            const SliceParams q = fam == Family::Lower ? p : SliceParams{p.M, -p.H, -p.c};
            if (!branch_roots(q, cfg.tol.root).r_minus) branch = Branch::Plus;
        }
        s = build_slice_ivp(p, branch, cfg.X_max, opts, family);
    } else {
        s = leaf(f.c, cfg.curve(), cfg.X_max, opts);
    }
    if (cfg.path.empty()) {
        emit_slice(out, s, cfg.format);
    } else {
        auto os = open_out(cfg.path);
        emit_slice(os, s, cfg.format);
    }
    return kExitOk;
}

inline int cmd_foliation(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(f);
    const FoliationCurve fc = cfg.curve();
    const SliceOptions opts = cfg.slice_options();
    const std::filesystem::path dir = std::filesystem::path(cfg.path.empty() ? "foliation" : cfg.path);
    std::filesystem::create_directories(dir);

    FoliationIndex index{cfg.M, fc, {}};
    const std::vector<double> cs = cfg.c_values();
    const std::string ext = cfg.format == "json" ? ".json" : ".csv";
    auto write_index = [&](const std::optional<std::string>& error) {
        json j = index_to_json(index);
        if (error) {
            j["partial"] = true;
            j["error"] = *error;
        }
        auto os = open_out(dir / "index.json");
        os << j.dump(1) << '\n';
    };
    for (std::size_t k = 0; k < cs.size(); ++k) {
        try {
            const LeafParams lp = params_from_c(cs[k], fc, cfg.tol.root);
            const Hypersurface s = leaf(cs[k], fc, cfg.X_max, opts);
            char name[32];
            std::snprintf(name, sizeof name, "leaf_%04zu", k);
            const std::string file = name + ext;
            auto os = open_out(dir / file);
            emit_slice(os, s, cfg.format);
            index.leaves.push_back({lp.c, lp.H, lp.r, lp.branch, lp.family, s.t_intercept, file});
        } catch (const Error& e) {
            const std::string msg = "leaf c = " + format_double(cs[k]) + " failed: " + e.what();
            write_index(msg);
            err << "kruskal-cmc: " << msg << " (partial index written)\n";
            return kExitFailure;
        }
    }
    write_index(std::nullopt);
    out << index.leaves.size() << " leaves written to " << dir.string() << '\n';
    return kExitOk;
}

inline int cmd_locate(const Flags& f, std::ostream& out) {
    const RunConfig cfg = resolve(f);
    FoliationOptions fo;
    fo.slice = cfg.slice_options();
    fo.X_max = cfg.X_max;
    const FoliationCurve fc = cfg.curve();
    const LocateResult r = locate(f.T, f.X, fc, cfg.tol.root * 100.0, fo);
    const json j = {{"c", r.c},
                    {"H", r.params.H},
                    {"r", r.params.r},
                    {"branch", to_string(r.params.branch)},
                    {"family", to_string(r.params.family)},
                    {"residual_T", r.residual_T}};
    out << j.dump() << '\n';
    if (!cfg.path.empty()) {
        auto os = open_out(cfg.path);
        os << j.dump(1) << '\n';
    }
    return kExitOk;
}

inline int cmd_verify(const Flags& f, std::ostream& out) {
    const RunConfig cfg = resolve(f);
    bool known = f.suite == "all";
    for (const char* name : kSuiteNames) known = known || f.suite == name;
    if (!known) throw DomainError("unknown suite '" + f.suite + "'");

    VerifyContext ctx;
    ctx.curve = cfg.curve();
    ctx.c_grid = cfg.c_values();
    ctx.X_grid = default_X_grid(cfg.M, 21, cfg.X_max);
    ctx.X_max = cfg.X_max;
    ctx.slice = cfg.slice_options();
    if (f.points) ctx.coverage_points = *f.points;
    const VerificationReport rep = run_verify_suite(f.suite, ctx);

    for (const auto& c : rep.checks) {
        char nums[96];
        std::snprintf(nums, sizeof nums, "  worst=%.6g", c.worst_value);
        out << (c.pass ? "PASS " : "FAIL ") << c.name << nums;
        if (!c.worst_location.empty()) out << " at " << c.worst_location;
        std::snprintf(nums, sizeof nums, "  tol=%.3g", c.tolerance);
        out << nums << '\n';
    }
    out << (rep.pass() ? "overall: PASS" : "overall: FAIL") << '\n';
    const std::string path = !f.report.empty() ? f.report : cfg.path;
    if (!path.empty()) {
        auto os = open_out(path);
        os << report_to_json(rep).dump(1) << '\n';
    }
    return rep.pass() ? kExitOk : kExitFailure;
}

inline int cmd_plot(const Flags& f, std::ostream& out) {
    const RunConfig cfg = resolve(f);
    std::vector<Hypersurface> leaves;
    if (f.mo_family) {
        const double M = cfg.M;
        const std::vector<double> Hs = {1.0 / M, 0.5 / M, 0.0, -0.5 / M, -1.0 / M};
        leaves = mo_linear_family(Hs, M, cfg.X_max, cfg.slice_options());
    }
    if (!f.index.empty()) {
        const std::filesystem::path index_path(f.index);
        if (!std::filesystem::exists(index_path)) throw IoError("missing index '" + f.index + "'");
        const FoliationIndex index = index_from_json(read_json_file(f.index));
        for (const auto& e : index.leaves) {
            leaves.push_back(read_slice_file(index_path.parent_path() / e.file, index.M));
        }
    }
    for (const auto& file : f.slice_files) leaves.push_back(read_slice_file(file, cfg.M));
    if (leaves.empty()) throw DomainError("plot: nothing to draw (give --index, slice files or --mo-family)");

    PlotOptions po;
    po.half_width = f.half_width;
    if (cfg.path.empty()) {
        write_svg(out, leaves, cfg.M, po);
    } else {
        auto os = open_out(cfg.path);
        write_svg(os, leaves, cfg.M, po);
    }
    return kExitOk;
}

inline void add_curve_flags(CLI::App* app, Flags& f) {
    app->add_option("--p", f.p, "curve exponent p (> 1)");
    app->add_option("--C", f.C, "curve amplitude C, or 'auto'");
    app->add_option("--A", f.A, "curve shift A = y(2M)");
    app->add_option("--xmax", f.xmax, "largest |X| sampled");
    app->add_option("--samples", f.samples, "samples per side of the T-axis");
}

}  // namespace cli

/// Entry point for `kruskal-cmc`; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    cli::Flags f;
    CLI::App app{"CMC slices and foliations of the Kruskal extension", "kruskal-cmc"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--M", f.M, "mass");
    app.add_option("--config", f.config, "JSON run configuration");
    app.add_option("--out", f.out, "output file (directory for foliation)");
    app.add_option("--tol-root", f.tol_root);
    app.add_option("--tol-quad", f.tol_quad);
    app.add_option("--tol-ode", f.tol_ode);
    app.add_option("--tol-coord", f.tol_coord);
    app.add_option("--tol-resid", f.tol_resid);
    const auto formats = CLI::IsMember({"csv", "json"});

    auto* slice = app.add_subcommand("slice", "one CMC slice");
    slice->add_option("--H", f.H, "mean curvature (omit to take it from the foliation curve)");
    slice->add_option("--c", f.c, "integration constant")->required();
    slice->add_option("--branch", f.branch)->check(CLI::IsMember({"plus", "minus"}));
    slice->add_option("--family", f.family)->check(CLI::IsMember({"lower", "upper"}));
    slice->add_option("--format", f.format)->check(formats);
    cli::add_curve_flags(slice, f);

    auto* fol = app.add_subcommand("foliation", "leaf files plus index.json");
    fol->add_option("--c-list", f.c_list, "explicit parameter values");
    fol->add_option("--c-min", f.c_min);
    fol->add_option("--c-max", f.c_max);
    fol->add_option("--count", f.count);
    fol->add_option("--format", f.format)->check(formats);
    cli::add_curve_flags(fol, f);

    auto* loc = app.add_subcommand("locate", "leaf through a point");
    loc->add_option("--T", f.T)->required();
    loc->add_option("--X", f.X)->required();
    cli::add_curve_flags(loc, f);

    auto* ver = app.add_subcommand("verify", "invariant suites");
    ver->add_option("--suite", f.suite, "residual|spacelike|symmetry|disjoint|coverage|crosscheck|prop1|mo-family|all");
    ver->add_option("--report", f.report, "report JSON path");
    ver->add_option("--points", f.points, "random points for the coverage suite");
    ver->add_option("--c-list", f.c_list);
    ver->add_option("--c-min", f.c_min);
    ver->add_option("--c-max", f.c_max);
    ver->add_option("--count", f.count);
    cli::add_curve_flags(ver, f);

    auto* plot = app.add_subcommand("plot", "SVG Kruskal diagram");
    plot->add_option("--index", f.index, "foliation index.json");
    plot->add_option("files", f.slice_files, "slice CSV/JSON files");
    plot->add_flag("--mo-family", f.mo_family, "add the c = -8M^3 H family");
    plot->add_option("--half-width", f.half_width, "half width of the diagram in units of M");
    plot->add_option("--xmax", f.xmax);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*slice) return cli::cmd_slice(f, out);
        if (*fol) return cli::cmd_foliation(f, out, err);
        if (*loc) return cli::cmd_locate(f, out);
        if (*ver) return cli::cmd_verify(f, out);
        if (*plot) return cli::cmd_plot(f, out);
    } catch (const DomainError& e) {
        err << "kruskal-cmc: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const IoError& e) {
        err << "kruskal-cmc: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const Error& e) {
        err << "kruskal-cmc: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "kruskal-cmc: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}

}  // namespace kcmc
