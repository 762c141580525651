#pragma once

/// \file
/// Command-line front end: subcommands, option parsing and report output.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curvid/catalog.hpp"
#include "curvid/curvature.hpp"
#include "curvid/errors.hpp"
#include "curvid/frames.hpp"
#include "curvid/identities.hpp"
#include "curvid/quadrature.hpp"
#include "curvid/report.hpp"
#include "curvid/variation.hpp"

namespace curvid::cli {

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"verify-identity", "gauss-bonnet", "variation-check",
                                                "chern-basis",     "three-dim",    "catalog"};
    return names;
}

namespace detail {

/// Values given on the command line; unset ones leave the config untouched.
struct FlagValues {
    std::optional<std::string> metric, inner, config, output, csv, deformation;
    std::map<std::string, double> params;
    std::optional<int> points, jet_order, nodes, budget, restarts, iterations;
    std::optional<std::uint64_t> seed, deformation_seed;
    std::optional<double> tol_identity, tol_symmetry, tol_chi, tol_variation, tol_variation_rel, tol_order, tol_chern,
        dt, deformation_amp;
};

inline void add_options(CLI::App* app, FlagValues& f, std::map<std::string, double>& param_store,
                        std::map<std::string, CLI::Option*>& param_opts)
{
    app->add_option("--metric", f.metric, "catalog entry name");
    for (const char* key : {"r", "c", "c1", "c2", "eps", "dim", "amp"})
        param_opts[key] = app->add_option(std::string("--") + key, param_store[key], std::string("catalog parameter ") + key);
    param_opts["seed"] = app->add_option("--metric-seed", param_store["seed"], "catalog parameter seed");
    app->add_option("--inner", f.inner, "inner 3D entry of product_3d_x_line");
    app->add_option("--points", f.points, "sample points per metric");
    app->add_option("--seed", f.seed, "sampling seed");
    app->add_option("--jet-order", f.jet_order, "metric jet order for variation formulas (2-4)");
    app->add_option("--tol-identity", f.tol_identity);
    app->add_option("--tol-symmetry", f.tol_symmetry);
    app->add_option("--tol-chi", f.tol_chi);
    app->add_option("--tol-variation", f.tol_variation);
    app->add_option("--tol-variation-rel", f.tol_variation_rel);
    app->add_option("--tol-order", f.tol_order);
    app->add_option("--tol-chern", f.tol_chern);
    app->add_option("--nodes", f.nodes, "quadrature nodes per axis");
    app->add_option("--budget", f.budget, "maximum quadrature nodes per axis");
    app->add_option("--dt", f.dt, "finite-difference step");
    app->add_option("--restarts", f.restarts, "Chern search restarts");
    app->add_option("--iterations", f.iterations, "Chern search iterations per restart");
    app->add_option("--deformation", f.deformation, "deformation family: periodic | polynomial");
    app->add_option("--deformation-seed", f.deformation_seed);
    app->add_option("--deformation-amp", f.deformation_amp);
    app->add_option("--config", f.config, "JSON config file");
    app->add_option("--output", f.output, "JSON report path (stdout when absent)");
    app->add_option("--csv", f.csv, "CSV summary path");
}

inline void apply_flags(RunConfig& cfg, const FlagValues& f)
{
    if (f.metric) cfg.metric = *f.metric;
    if (f.inner) cfg.params.inner = *f.inner;
    for (const auto& [k, v] : f.params) cfg.params.values[k] = v;
    if (f.points) cfg.points = *f.points;
    if (f.seed) cfg.seed = *f.seed;
    if (f.jet_order) cfg.jet_order = *f.jet_order;
    if (f.tol_identity) cfg.tol_identity = *f.tol_identity;
    if (f.tol_symmetry) cfg.tol_symmetry = *f.tol_symmetry;
    if (f.tol_chi) cfg.tol_chi = *f.tol_chi;
    if (f.tol_variation) cfg.tol_variation = *f.tol_variation;
    if (f.tol_variation_rel) cfg.tol_variation_rel = *f.tol_variation_rel;
    if (f.tol_order) cfg.tol_order = *f.tol_order;
    if (f.tol_chern) cfg.tol_chern = *f.tol_chern;
    if (f.nodes) cfg.grid_nodes = *f.nodes;
    if (f.budget) cfg.grid_budget = *f.budget;
    if (f.dt) cfg.dt = *f.dt;
    if (f.restarts) cfg.restarts = *f.restarts;
    if (f.iterations) cfg.iterations = *f.iterations;
    if (f.deformation) cfg.deformation = *f.deformation;
    if (f.deformation_seed) cfg.deformation_seed = *f.deformation_seed;
    if (f.deformation_amp) cfg.deformation_amp = *f.deformation_amp;
    if (f.output) cfg.output = *f.output;
    if (f.csv) cfg.csv = *f.csv;
}

inline std::string point_digest(const Point& p, int dim)
{
    std::string s;
    for (int i = 0; i < dim; ++i) s += exact(p[i]) + ',';
    return s;
}

inline std::string entry_digest(const CatalogEntry& e)
{
    std::string s = e.name + '{';
    for (const auto& [k, v] : e.params.values) s += k + '=' + exact(v) + ',';
    if (!e.params.inner.empty()) s += "inner=" + e.params.inner;
    return s + '}';
}

inline std::vector<Point> sample_points(const ChartDomain& d, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Point> pts;
    for (int k = 0; k < count; ++k) pts.push_back(d.sample(rng));
    return pts;
}

/// Points in the central half of every bounded axis.
inline std::vector<Point> sample_central(const ChartDomain& d, int count, std::uint64_t seed)
{
    ChartDomain c = d;
    for (int a = 0; a < d.dim; ++a) {
        if (d.periodic[a]) continue;
        const double mid = 0.5 * (d.lo[a] + d.hi[a]), q = 0.25 * (d.hi[a] - d.lo[a]);
        c.lo[a] = mid - q;
        c.hi[a] = mid + q;
    }
    return sample_points(c, count, seed);
}

inline std::string pid(const std::string& base, int k) { return base + "/p" + std::to_string(k); }

inline CatalogEntry require_metric(const RunConfig& cfg)
{
    if (cfg.metric.empty()) throw ConfigError("--metric is required for '" + cfg.command + "'");
    return catalog_metric(cfg.metric, cfg.params);
}

/// Relative deviation of a computed invariant from its closed-form value.
inline double reference_deviation(double value, double expected)
{
    return std::abs(value - expected) / std::max(1.0, std::abs(expected));
}

inline void add_reference_records(Report& rep, const CatalogEntry& e, const CurvaturePack& p, const std::string& id,
                                  const std::string& inputs, double tol)
{
    const auto& ref = e.reference;
    const std::pair<const char*, std::optional<double>> refs[] = {
        {"tau", ref.tau}, {"norm_R2", ref.norm_R2}, {"norm_rho2", ref.norm_rho2}};
    const double values[] = {p.tau, p.norm_R2, p.norm_rho2};
    for (int k = 0; k < 3; ++k) {
        if (!refs[k].second) continue;
        const double dev = reference_deviation(values[k], *refs[k].second);
        rep.add(id + "/" + refs[k].first, CheckTag::reference_value, inputs, dev, tol, dev <= tol);
    }
}

// Subcommands
// ---------------------------------------------------------------------------

inline void verify_identity(Report& rep)
{
    const RunConfig& cfg = rep.config();
    const CatalogEntry e = require_metric(cfg);
    if (e.metric.dim() != 4) throw DimensionError("verify-identity needs a 4-dimensional metric");
    const auto pts = sample_points(e.metric.domain(), cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const std::string id = pid(e.name, k);
        const std::string in = entry_digest(e) + point_digest(pts[k], 4);
        const CurvaturePack p = curvature_pack(e.metric, pts[k]);

        const auto sym = check_riemann_symmetries(p, cfg.tol_symmetry);
        rep.add(id + "/symmetry", CheckTag::riemann_symmetry, in, sym.scale > 0 ? sym.worst() / sym.scale : sym.worst(),
                cfg.tol_symmetry, sym.pass);

        const auto res = identity_residual(p, cfg.tol_identity);
        rep.add(id + "/residual", CheckTag::main_identity, in, res.relative, cfg.tol_identity, res.pass);

        const double tr = identity_trace_check(p);
        const double tr_scale = std::max(1.0, res.scale);
        rep.add(id + "/trace", CheckTag::identity_trace, in, std::abs(tr) / tr_scale, cfg.tol_identity,
                std::abs(tr) <= cfg.tol_identity * tr_scale);
    }
}

inline void gauss_bonnet(Report& rep)
{
    const RunConfig& cfg = rep.config();
    const CatalogEntry e = require_metric(cfg);
    if (!e.reference.euler) throw DomainError("no Euler characteristic is known for '" + e.name + "'");
    QuadratureOptions opt;
    opt.nodes = cfg.grid_nodes;
    opt.budget = cfg.grid_budget;
    const std::string in = entry_digest(e) + "nodes=" + std::to_string(cfg.grid_nodes) +
                           ",budget=" + std::to_string(cfg.grid_budget);
    try {
        const EulerResult r = euler_characteristic(e, opt);
        rep.add(e.name + "/chi", CheckTag::gauss_bonnet, in, r.chi, cfg.tol_chi,
                std::abs(r.chi - *e.reference.euler) <= cfg.tol_chi);
    } catch (const QuadratureError&) {
        rep.add(e.name + "/chi", CheckTag::gauss_bonnet, in, std::nan(""), cfg.tol_chi, false);
    }
}

inline DeformationField make_h(const RunConfig& cfg, int dim)
{
    return cfg.deformation == "polynomial" ? polynomial_deformation(dim, cfg.deformation_seed, cfg.deformation_amp)
                                           : periodic_deformation(dim, cfg.deformation_seed, cfg.deformation_amp);
}

inline bool fully_periodic(const ChartDomain& d)
{
    for (int a = 0; a < d.dim; ++a)
        if (!d.periodic[a]) return false;
    return true;
}

inline void variation_check(Report& rep)
{
    const RunConfig& cfg = rep.config();
    const CatalogEntry e = require_metric(cfg);
    const int n = e.metric.dim();
    const DeformationField h = make_h(cfg, n);
    const std::vector<double> steps{16.0 * cfg.dt, 8.0 * cfg.dt, 4.0 * cfg.dt, 2.0 * cfg.dt, cfg.dt};
    const std::string hdig = cfg.deformation + ":" + std::to_string(cfg.deformation_seed) + ":" +
                             exact(cfg.deformation_amp) + ":dt=" + exact(cfg.dt) + ":k=" + std::to_string(cfg.jet_order);
    const VariationQuantity quantities[] = {VariationQuantity::inverse_metric, VariationQuantity::volume_factor,
                                            VariationQuantity::christoffel,    VariationQuantity::riemann,
                                            VariationQuantity::ricci,          VariationQuantity::scalar};
    const auto pts = sample_central(e.metric.domain(), cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const std::string in = entry_digest(e) + hdig + point_digest(pts[k], n);
        for (VariationQuantity q : quantities) {
            if (q == VariationQuantity::volume_factor && !e.metric.riemannian()) continue;
            const FdComparison c = fd_compare(q, e.metric, h, pts[k], steps, cfg.jet_order);
            const std::string id = pid(e.name, k) + "/" + quantity_name(q);
            const double rel = c.final_error / c.scale;
            rep.add(id + "/agreement", CheckTag::variation_pointwise, in, rel, cfg.tol_variation,
                    rel <= cfg.tol_variation);
            rep.add(id + "/order", CheckTag::variation_order, in, c.order, cfg.tol_order, c.order >= cfg.tol_order);
        }
    }

    // Integral identities need a closed chart without boundary terms.
    if (!e.closed || !fully_periodic(e.metric.domain()) || !e.metric.riemannian()) return;
    IntegralVariationOptions opt;
    opt.nodes = cfg.grid_nodes;
    opt.dt = cfg.dt;
    opt.rel_tol = cfg.tol_variation_rel;
    opt.abs_tol = cfg.tol_variation;
    const std::string in = entry_digest(e) + hdig + "nodes=" + std::to_string(cfg.grid_nodes);
    for (const auto& r : integral_variation_all(e, h, opt)) {
        if (r.selector == IntegralSelector::gauss_bonnet_total && n != 4) continue;
        rep.add(e.name + "/integral/" + selector_name(r.selector), CheckTag::variation_integral, in, r.diff,
                r.tolerance, r.pass);
    }
}

inline void chern_basis(Report& rep)
{
    const RunConfig& cfg = rep.config();
    const CatalogEntry e = require_metric(cfg);
    if (e.metric.dim() != 4) throw DimensionError("chern-basis needs a 4-dimensional metric");
    if (!e.metric.riemannian()) throw DomainError("chern-basis needs a Riemannian metric");
    const auto pts = sample_points(e.metric.domain(), cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const std::string id = pid(e.name, k);
        const std::string in = entry_digest(e) + point_digest(pts[k], 4);
        const CurvaturePack p = curvature_pack(e.metric, pts[k]);
        const FrameCurvature f = frame_curvature(p);
        ChernSearchOptions opt;
        opt.restarts = cfg.restarts;
        opt.iterations = cfg.iterations;
        opt.seed = cfg.seed + static_cast<std::uint64_t>(k);
        opt.tolerance = cfg.tol_chern;
        const ChernSearchResult s = chern_basis_search(f.riemann, opt);
        rep.add(id + "/search", CheckTag::chern_basis, in, s.objective, s.threshold, s.success);
        if (!s.success) continue;
        const Tensor rho = frame_ricci(s.rotated);
        const auto x = chern_expansion_check(s.rotated, rho, p.tau, cfg.tol_identity);
        double worst = 0.0;
        for (const auto& g : x.groups) worst = std::max(worst, g.residual);
        const double rel = x.scale > 0.0 ? worst / x.scale : worst;
        rep.add(id + "/expansions", CheckTag::chern_expansion, in, rel, cfg.tol_identity, x.pass);
        if (e.einstein) {
            const auto st = singer_thorpe_check(s.rotated, rho, p.tau, cfg.tol_identity);
            const double v = std::max({st.einstein, st.chern, st.mixed, st.pairing});
            rep.add(id + "/singer-thorpe", CheckTag::singer_thorpe, in, st.scale > 0.0 ? v / st.scale : v,
                    cfg.tol_identity, st.pass);
        }
    }
}

inline void three_dim(Report& rep)
{
    const RunConfig& cfg = rep.config();
    const CatalogEntry e = require_metric(cfg);
    const int n = e.metric.dim();
    if (n != 3 && n != 4) throw DimensionError("three-dim needs a 3-dimensional metric or product_3d_x_line");
    const auto pts = sample_points(e.metric.domain(), cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const std::string id = pid(e.name, k);
        const std::string in = entry_digest(e) + point_digest(pts[k], n);
        const CurvaturePack p = curvature_pack(e.metric, pts[k]);
        if (n == 3) {
            const auto r = three_dim_check(p, cfg.tol_identity);
            const double scale = std::max(1.0, r.scale);
            const double v = std::max({r.defect_max, std::abs(r.value), std::abs(r.defect_sum_sq - 4.0 * r.value)});
            rep.add(id + "/reconstruction", CheckTag::three_dim_reconstruction, in, v / scale, cfg.tol_identity, r.pass);
        } else {
            const auto r = three_dim_norm_identity(p, cfg.tol_identity);
            const double scale = std::max(1.0, r.scale);
            rep.add(id + "/norm", CheckTag::three_dim_norm, in, std::abs(r.from_residual - r.value) / scale,
                    cfg.tol_identity, r.pass);
        }
    }
}

inline void catalog_entry_checks(Report& rep, const CatalogEntry& e)
{
    const RunConfig& cfg = rep.config();
    const int n = e.metric.dim();
    const ChartDomain& d = e.metric.domain();
    const auto pts = sample_points(d, cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const std::string id = pid(e.name, k);
        const std::string in = entry_digest(e) + point_digest(pts[k], n);
        const Tensor g = e.metric.at(pts[k]);
        const double det = normalized_determinant(g);
        const bool inertia = negative_inertia(g) == negative_count(e.metric.signature());
        rep.add(id + "/signature", CheckTag::catalog_signature, in, det, kDegenerateDeterminant,
                inertia && det >= kDegenerateDeterminant);

        const CurvaturePack p = curvature_pack(e.metric, pts[k]);
        const auto sym = check_riemann_symmetries(p, cfg.tol_symmetry);
        rep.add(id + "/symmetry", CheckTag::riemann_symmetry, in, sym.scale > 0 ? sym.worst() / sym.scale : sym.worst(),
                cfg.tol_symmetry, sym.pass);

        for (int a = 0; a < n; ++a) {
            if (!d.periodic[a]) continue;
            Point q = pts[k];
            q[a] += d.period(a);
            const CurvaturePack pq = curvature_pack(e.metric, q);
            const double scale = std::max({1.0, max_abs(p.g), max_abs(p.riemann)});
            const double v = std::max(max_abs(pq.g - p.g), max_abs(pq.riemann - p.riemann)) / scale;
            rep.add(id + "/period" + std::to_string(a), CheckTag::catalog_periodicity, in, v, cfg.tol_symmetry,
                    v <= cfg.tol_symmetry);
        }
    }
    // Closed-form values at well-conditioned interior points.
    const auto inner = sample_central(d, cfg.points, cfg.seed);
    for (int k = 0; k < static_cast<int>(inner.size()); ++k) {
        const std::string id = pid(e.name, k) + "c";
        const std::string in = entry_digest(e) + point_digest(inner[k], n);
        const CurvaturePack p = curvature_pack(e.metric, inner[k]);
        add_reference_records(rep, e, p, id + "/reference", in, cfg.tol_identity);
        if (e.einstein) {
            const auto r = einstein_residual(p, cfg.tol_identity);
            rep.add(id + "/einstein", CheckTag::einstein, in, r.relative, cfg.tol_identity, r.pass);
        }
        if (e.weakly_einstein) {
            const auto r = weakly_einstein_residual(p, cfg.tol_identity);
            rep.add(id + "/weakly-einstein", CheckTag::weakly_einstein, in, r.relative, cfg.tol_identity, r.pass);
        }
    }
}

inline void catalog(Report& rep)
{
    const RunConfig& cfg = rep.config();
    if (!cfg.metric.empty()) {
        catalog_entry_checks(rep, catalog_metric(cfg.metric, cfg.params));
        return;
    }
    if (!cfg.params.values.empty() || !cfg.params.inner.empty())
        throw ConfigError("catalog parameters need --metric");
    for (const auto& name : catalog_names()) catalog_entry_checks(rep, catalog_metric(name));
}

inline void check_writable(const std::string& path)
{
    if (path.empty()) return;
    std::ofstream f(path, std::ios::app);
    if (!f) throw ConfigError("cannot write to '" + path + "'");
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::trunc);
    f << text;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace detail

/// Runs one subcommand. Exit code 0 when every record passes, 1 when any
/// fails, 2 on usage, configuration or output errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"curvid: curvature identity verification on catalog metrics", "curvid"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    detail::FlagValues flags;
    std::map<std::string, double> param_store;
    std::map<std::string, std::map<std::string, CLI::Option*>> param_opts;
    for (const auto& name : subcommands()) {
        static const std::map<std::string, std::string> about{
            {"verify-identity", "pointwise quadratic curvature identity residuals"},
            {"gauss-bonnet", "Euler characteristic by quadrature"},
            {"variation-check", "analytic variations against finite differences"},
            {"chern-basis", "search for a Chern orthonormal basis"},
            {"three-dim", "three-dimensional Riemann reconstruction"},
            {"catalog", "closed-form invariants of a catalog entry"}};
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        detail::add_options(sub, flags, param_store, param_opts[name]);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        std::string command;
        for (const auto& name : subcommands())
            if (app.got_subcommand(name)) command = name;
        for (const auto& [key, opt] : param_opts[command])
            if (opt->count() > 0) flags.params[key] = param_store[key];
        if (flags.config) cfg = load_config(*flags.config);
        detail::apply_flags(cfg, flags);
        cfg.command = command;
        cfg.validate();
        detail::check_writable(cfg.output);
        detail::check_writable(cfg.csv);
    } catch (const Error& e) {
        err << "curvid: " << e.what() << '\n';
        return 2;
    }

    Report rep(cfg);
    try {
        static const std::map<std::string, std::function<void(Report&)>> table{
            {"verify-identity", detail::verify_identity}, {"gauss-bonnet", detail::gauss_bonnet},
            {"variation-check", detail::variation_check}, {"chern-basis", detail::chern_basis},
            {"three-dim", detail::three_dim},             {"catalog", detail::catalog}};
        table.at(cfg.command)(rep);
    } catch (const Error& e) {
        err << "curvid " << cfg.command << ": " << e.what() << '\n';
        return 2;
    }

    try {
        const std::string json = rep.to_json().dump(2) + "\n";
        if (cfg.output.empty()) out << json;
        else detail::write_file(cfg.output, json);
        if (!cfg.csv.empty()) detail::write_file(cfg.csv, rep.to_csv());
    } catch (const Error& e) {
        err << "curvid: " << e.what() << '\n';
        return 2;
    }
    if (!cfg.output.empty())
        out << cfg.command << ": " << rep.records().size() << " records, " << rep.passed() << " passed, "
            << rep.failed() << " failed\n";
    return rep.all_pass() ? 0 : 1;
}

}  // namespace curvid::cli
