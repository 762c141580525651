#pragma once

/// \file
/// Run configuration and machine-readable verification reports.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curvid/catalog.hpp"
#include "curvid/errors.hpp"

namespace curvid {

inline constexpr const char* kVersion = "0.1.0";

/// Check families appearing in reports.
enum class CheckTag {
    riemann_symmetry,
    metric_compatibility,
    main_identity,
    identity_trace,
    reference_value,
    weakly_einstein,
    einstein,
    gauss_bonnet,
    variation_pointwise,
    variation_order,
    variation_integral,
    chern_basis,
    chern_expansion,
    singer_thorpe,
    three_dim_reconstruction,
    three_dim_norm,
    catalog_signature,
    catalog_periodicity,
};

inline const char* tag_name(CheckTag t)
{
    switch (t) {
    case CheckTag::riemann_symmetry: return "riemann-symmetry";
    case CheckTag::metric_compatibility: return "metric-compatibility";
    case CheckTag::main_identity: return "main-identity";
    case CheckTag::identity_trace: return "identity-trace";
    case CheckTag::reference_value: return "reference-value";
    case CheckTag::weakly_einstein: return "weakly-einstein";
    case CheckTag::einstein: return "einstein";
    case CheckTag::gauss_bonnet: return "gauss-bonnet";
    case CheckTag::variation_pointwise: return "variation-pointwise";
    case CheckTag::variation_order: return "variation-order";
    case CheckTag::variation_integral: return "variation-integral";
    case CheckTag::chern_basis: return "chern-basis";
    case CheckTag::chern_expansion: return "chern-expansion";
    case CheckTag::singer_thorpe: return "singer-thorpe";
    case CheckTag::three_dim_reconstruction: return "three-dim-reconstruction";
    case CheckTag::three_dim_norm: return "three-dim-norm";
    case CheckTag::catalog_signature: return "catalog-signature";
    case CheckTag::catalog_periodicity: return "catalog-periodicity";
    }
    return "?";
}

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Exact textual form of a double for digests.
inline std::string exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

struct RunConfig {
    std::string command;
    std::string metric;
    CatalogParams params;
    int points = 20;
    std::uint64_t seed = 0;
    int jet_order = 2;

    double tol_identity = 1e-9;
    double tol_symmetry = 1e-10;
    double tol_chi = 1e-3;
    double tol_variation = 1e-6;      // absolute, scaled by max(1, |analytic|)
    double tol_variation_rel = 1e-3;  // integral identities: max(tol_variation, rel · |lhs|)
    double tol_order = 1.9;
    double tol_chern = 1e-16;

    int grid_nodes = 24;
    int grid_budget = 96;
    double dt = 1e-3;
    int restarts = 32;
    int iterations = 500;

    std::string deformation = "periodic";  // periodic | polynomial
    std::uint64_t deformation_seed = 1;
    double deformation_amp = 0.3;

    std::string output;  // JSON path, stdout when empty
    std::string csv;     // optional CSV summary path

    void validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a positive number");
        };
        positive(tol_identity, "tol_identity");
        positive(tol_symmetry, "tol_symmetry");
        positive(tol_chi, "tol_chi");
        positive(tol_variation, "tol_variation");
        positive(tol_variation_rel, "tol_variation_rel");
        positive(tol_order, "tol_order");
        positive(tol_chern, "tol_chern");
        positive(dt, "dt");
        positive(deformation_amp, "deformation_amp");
        if (points < 1) throw ConfigError("points must be >= 1");
        if (jet_order < 2 || jet_order > kMaxJetOrder) throw ConfigError("jet_order must lie in [2, 4]");
        if (grid_nodes < 2) throw ConfigError("grid_nodes must be >= 2");
        if (grid_budget < grid_nodes) throw ConfigError("grid_budget must be >= grid_nodes");
        if (restarts < 1 || iterations < 1) throw ConfigError("restarts and iterations must be >= 1");
        if (deformation != "periodic" && deformation != "polynomial")
            throw ConfigError("deformation must be 'periodic' or 'polynomial'");
    }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["metric"] = metric;
        nlohmann::ordered_json p = nlohmann::ordered_json::object();
        for (const auto& [k, v] : params.values) p[k] = v;
        if (!params.inner.empty()) p["inner"] = params.inner;
        j["params"] = p;
        j["points"] = points;
        j["seed"] = seed;
        j["jet_order"] = jet_order;
        j["tol_identity"] = tol_identity;
        j["tol_symmetry"] = tol_symmetry;
        j["tol_chi"] = tol_chi;
        j["tol_variation"] = tol_variation;
        j["tol_variation_rel"] = tol_variation_rel;
        j["tol_order"] = tol_order;
        j["tol_chern"] = tol_chern;
        j["grid_nodes"] = grid_nodes;
        j["grid_budget"] = grid_budget;
        j["dt"] = dt;
        j["restarts"] = restarts;
        j["iterations"] = iterations;
        j["deformation"] = deformation;
        j["deformation_seed"] = deformation_seed;
        j["deformation_amp"] = deformation_amp;
        return j;
    }
};

/// Apply the keys of a JSON object onto `cfg`. Unknown keys are rejected.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto num = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
        return v.get<double>();
    };
    auto integer = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
        return v.get<long long>();
    };
    auto str = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
        return v.get<std::string>();
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "metric") cfg.metric = str(v, key);
        else if (key == "params") {
            if (!v.is_object()) throw ConfigError("config key 'params' must be an object");
            for (const auto& [pk, pv] : v.items()) {
                if (pk == "inner") cfg.params.inner = str(pv, pk);
                else cfg.params.values[pk] = num(pv, pk);
            }
        }
        else if (key == "points") cfg.points = static_cast<int>(integer(v, key));
        else if (key == "seed") {
            const long long s = integer(v, key);
            if (s < 0) throw ConfigError("seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(s);
        }
        else if (key == "jet_order") cfg.jet_order = static_cast<int>(integer(v, key));
        else if (key == "tol_identity") cfg.tol_identity = num(v, key);
        else if (key == "tol_symmetry") cfg.tol_symmetry = num(v, key);
        else if (key == "tol_chi") cfg.tol_chi = num(v, key);
        else if (key == "tol_variation") cfg.tol_variation = num(v, key);
        else if (key == "tol_variation_rel") cfg.tol_variation_rel = num(v, key);
        else if (key == "tol_order") cfg.tol_order = num(v, key);
        else if (key == "tol_chern") cfg.tol_chern = num(v, key);
        else if (key == "grid_nodes") cfg.grid_nodes = static_cast<int>(integer(v, key));
        else if (key == "grid_budget") cfg.grid_budget = static_cast<int>(integer(v, key));
        else if (key == "dt") cfg.dt = num(v, key);
        else if (key == "restarts") cfg.restarts = static_cast<int>(integer(v, key));
        else if (key == "iterations") cfg.iterations = static_cast<int>(integer(v, key));
        else if (key == "deformation") cfg.deformation = str(v, key);
        else if (key == "deformation_seed") {
            const long long s = integer(v, key);
            if (s < 0) throw ConfigError("deformation_seed must be non-negative");
            cfg.deformation_seed = static_cast<std::uint64_t>(s);
        }
        else if (key == "deformation_amp") cfg.deformation_amp = num(v, key);
        else if (key == "output") cfg.output = str(v, key);
        else if (key == "csv") cfg.csv = str(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

/// Defaults overlaid with the JSON document at `path`.
inline RunConfig load_config(const std::string& path, RunConfig base = {})
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    apply_config_json(base, j);
    base.validate();
    return base;
}

struct Record {
    std::string id;
    CheckTag tag{};
    std::string inputs_digest;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

class Report {
public:
    explicit Report(RunConfig cfg) : cfg_(std::move(cfg)) {}

    const RunConfig& config() const { return cfg_; }
    const std::vector<Record>& records() const { return records_; }

    /// Adds a record; `inputs` is hashed into the digest together with the id.
    void add(std::string id, CheckTag tag, const std::string& inputs, double value, double tolerance, bool pass)
    {
        const std::string digest = fnv1a_hex(id + '|' + tag_name(tag) + '|' + inputs);
        records_.push_back({std::move(id), tag, digest, value, tolerance, pass});
    }

    std::size_t passed() const
    {
        std::size_t n = 0;
        for (const auto& r : records_) n += r.pass;
        return n;
    }
    std::size_t failed() const { return records_.size() - passed(); }
    bool all_pass() const { return failed() == 0; }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["version"] = kVersion;
        j["conventions"] = {
            {"curvature", "R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y]Z, R_ijkl = g(R(d_i,d_j)d_k, d_l), rho_jk = R_ijk^i"},
            {"laplacian", "Delta f = g^ab nabla_a nabla_b f"},
        };
        j["config"] = cfg_.to_json();
        nlohmann::ordered_json recs = nlohmann::ordered_json::array();
        for (const auto& r : records_) {
            nlohmann::ordered_json o;
            o["id"] = r.id;
            o["tag"] = tag_name(r.tag);
            o["inputs_digest"] = r.inputs_digest;
            o["value"] = std::isfinite(r.value) ? nlohmann::ordered_json(r.value) : nlohmann::ordered_json(nullptr);
            o["tolerance"] = r.tolerance;
            o["pass"] = r.pass;
            recs.push_back(std::move(o));
        }
        j["records"] = std::move(recs);
        j["summary"] = {{"records", records_.size()}, {"passed", passed()}, {"failed", failed()}};
        return j;
    }

    std::string to_csv() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "id,tag,value,tolerance,pass\n";
        for (const auto& r : records_)
            os << r.id << ',' << tag_name(r.tag) << ',' << r.value << ',' << r.tolerance << ',' << (r.pass ? 1 : 0)
               << '\n';
        return os.str();
    }

private:
    RunConfig cfg_;
    std::vector<Record> records_;
};

}  // namespace curvid
