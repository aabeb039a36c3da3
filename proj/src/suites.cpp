#include "cqms/suites.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <set>

#include "cqms/berezin.hpp"
#include "cqms/nctorus.hpp"

namespace cqms::suites {

using io::json;
namespace fs = std::filesystem;

std::uint64_t config_hash(const json& config) {
    // canonical form: plain nlohmann::json sorts keys on dump
    nlohmann::json sorted = nlohmann::json::parse(config.dump());
    const std::string canon = sorted.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

struct SystemBundle {
    std::string label;
    lip::LipNormPtr lip;
};

// {"kind": "two_point", "d": ...} | {"kind": "torus", "q":, "p":} |
// {"kind": "lipnorm_file", "path": ...}
SystemBundle build_system(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "two_point") {
        const double d = spec.value("d", 1.0);
        auto tp = lip::make_two_point(d);
        return {"two_point_d" + io::format_double(d), tp.lip};
    }
    if (kind == "torus") {
        const int q = spec.at("q").get<int>();
        const int p01 = spec.at("p").get<int>();
        const int dtor = spec.value("d", 2);
        Eigen::MatrixXi p = Eigen::MatrixXi::Zero(dtor, dtor);
        if (dtor == 2) {
            p(0, 1) = p01;
            p(1, 0) = -p01;
        } else if (spec.contains("p_matrix")) {
            const auto rows = spec.at("p_matrix");
            for (int i = 0; i < dtor; ++i) {
                for (int j = 0; j < dtor; ++j) p(i, j) = rows[i][j].get<int>();
            }
        } else {
            throw input_error("torus spec with d > 2 needs p_matrix");
        }
        auto ts = nctorus::clock_shift_algebra(dtor, q, p);
        auto l = nctorus::torus_lip_norm(ts, nctorus::euclidean_length(dtor));
        return {"torus_q" + std::to_string(q) + "_p" + std::to_string(p01), l};
    }
    if (kind == "one_point") {
        return {"one_point", lip::make_point_lip()};
    }
    if (kind == "lipnorm_file") {
        const fs::path path = spec.at("path").get<std::string>();
        if (!fs::exists(path)) throw input_error("lipnorm_file does not exist: " + path.string());
        return {path.stem().string(), io::lipnorm_from_json(io::load_json(path))};
    }
    throw input_error("unknown system kind: " + kind);
}

void push_quantity(json& record, const std::string& name, const metrics::MetricEstimate& est) {
    json q = io::estimate_to_json(est);
    q["name"] = name;
    record["quantities"].push_back(std::move(q));
}

void push_flag(json& record, const std::string& name, bool ok, double value = 0.0) {
    json q;
    q["name"] = name;
    q["value"] = ok ? 1.0 : 0.0;
    q["kind"] = "exact";
    q["detail"] = value;
    record["quantities"].push_back(std::move(q));
}

// ---------------------------------------------------------------------------

int run_validate(const json& config, json& record, const fs::path&, std::uint64_t seed) {
    bool all_ok = true;
    for (const auto& spec : config.at("systems")) {
        SystemBundle bundle = build_system(spec);
        auto rep = lip::validate_lipnorm(*bundle.lip, Rng(mix_seed(seed, bundle.label)), 48);
        push_flag(record, "validate/" + bundle.label + "/lipnorm", rep.ok,
                  rep.worst_triangle);
        all_ok = all_ok && rep.ok;

        if (spec.at("kind") == "torus") {
            auto chk = nctorus::validate_length(
                nctorus::euclidean_length(spec.value("d", 2)), spec.value("d", 2),
                Rng(mix_seed(seed, "length")));
            push_flag(record, "validate/" + bundle.label + "/length", chk.ok,
                      chk.worst_subadditivity);
            all_ok = all_ok && chk.ok;
        }
    }
    return all_ok ? exit_ok : exit_validation;
}

int run_distance(const json& config, json& record, const fs::path&, std::uint64_t seed) {
    for (const auto& exp : config.at("experiments")) {
        const std::string kind = exp.at("kind").get<std::string>();
        if (kind == "scaling_family") {
            const double d = exp.value("d", 2.0);
            auto tp = lip::make_two_point(d);
            auto point = lip::make_point_lip();
            const double big_c = exp.value("C", d);
            for (const auto& lj : exp.at("lambdas")) {
                const double lambda = lj.get<double>();
                auto scaled = lip::make_scaled_lip(tp.lip, lambda);
                metrics::DistUpperOptions opts;
                opts.seed = mix_seed(seed, "scaling");
                auto est = metrics::dist_upper(scaled, point,
                                               metrics::make_scaling_bridge(lambda, big_c), opts);
                push_quantity(record,
                              "distance/scaling_lambda" + io::format_double(lambda), est);
            }
        } else if (kind == "norm") {
            const double eps = exp.at("eps").get<double>();
            SystemBundle x = build_system(exp.at("system"));
            metrics::DistUpperOptions opts;
            opts.seed = mix_seed(seed, "norm");
            auto est = metrics::dist_upper(x.lip, x.lip, metrics::make_norm_bridge(eps), opts);
            push_quantity(record, "distance/norm_eps" + io::format_double(eps), est);
        } else if (kind == "quotient") {
            const double eta = exp.at("eta").get<double>();
            const double defect = exp.at("defect").get<double>();
            SystemBundle x = build_system(exp.at("system"));
            auto bridge = metrics::make_quotient_bridge(
                eta, CMatrix::Identity(x.lip->system()->dim(), x.lip->system()->dim()), defect);
            metrics::DistUpperOptions opts;
            opts.seed = mix_seed(seed, "quotient");
            auto est = metrics::dist_upper(x.lip, x.lip, bridge, opts);
            push_quantity(record, "distance/quotient_eta" + io::format_double(eta), est);
        } else if (kind == "point") {
            const double gamma = exp.at("gamma").get<double>();
            SystemBundle x = build_system(exp.at("system"));
            auto dx = metrics::diameter(*x.lip, 1);
            const double d_up = dx.upper.value_or(dx.lower.value + 0.1);
            auto bridge = metrics::make_point_bridge(
                gamma, opsys::tracial_state_values(*x.lip->system()),
                opsys::tracial_state_values(*x.lip->system()), d_up, d_up);
            metrics::DistUpperOptions opts;
            opts.seed = mix_seed(seed, "point");
            auto est = metrics::dist_upper(x.lip, x.lip, bridge, opts);
            push_quantity(record, "distance/point_gamma" + io::format_double(gamma), est);
        } else if (kind == "diameter") {
            SystemBundle x = build_system(exp.at("system"));
            for (const auto& nj : exp.at("levels")) {
                const Eigen::Index n = nj.get<Eigen::Index>();
                metrics::DiameterOptions opts;
                opts.seed = mix_seed(seed, 900 + n);
                auto est = metrics::diameter(*x.lip, n, opts);
                push_quantity(record,
                              "distance/diameter/" + x.label + "/n" + std::to_string(n),
                              est.lower);
            }
        } else {
            throw input_error("unknown distance experiment: " + kind);
        }
    }
    return exit_ok;
}

int run_berezin(const json& config, json& record, const fs::path& out_dir, std::uint64_t seed) {
    const double j_min = config.value("j_min", 0.5);
    const double j_max = config.value("j_max", 8.0);
    const int gamma_samples = config.value("gamma_samples", 6);
    const int n_theta = config.value("grid_theta", 24);
    const int n_phi = config.value("grid_phi", 48);

    berezin::SphereGrid grid = berezin::make_grid(n_theta, n_phi);
    std::vector<std::vector<std::string>> rows;
    for (double j = j_min; j <= j_max + 1e-9; j += 0.5) {
        berezin::SpinRep rep = berezin::make_spin(j);
        auto lips = berezin::sphere_lip_norms(rep, {std::numbers::pi / 4, std::numbers::pi / 2});
        auto g = berezin::bridge_gamma_estimate(rep, grid, lips, gamma_samples,
                                                mix_seed(seed, std::to_string(j)));
        rows.push_back({io::format_double(j), std::to_string(rep.dim),
                        io::format_double(g.gamma), io::format_double(g.max_residual),
                        io::format_double(g.upper_bound)});
        metrics::MetricEstimate est = g.estimate;
        push_quantity(record, "berezin/j" + io::format_double(j) + "/upper_bound", est);
    }
    io::write_csv(out_dir / "berezin.csv", {"j", "dim", "gamma", "max_residual", "upper_bound"},
                  rows);
    return exit_ok;
}

int run_nctorus(const json& config, json& record, const fs::path& out_dir, std::uint64_t seed) {
    const int cesaro = config.value("cesaro", 2);
    const double margin = config.value("margin", 0.05);
    std::vector<std::pair<int, int>> cells; // (q, p)
    if (config.contains("coprime_probe")) {
        const int q_max = config.at("coprime_probe").value("q_max", 8);
        for (int q = 2; q <= q_max; ++q) {
            for (int p = 1; p < q; ++p) {
                if (std::gcd(p, q) == 1) cells.emplace_back(q, p);
            }
        }
    }
    if (config.contains("cells")) {
        for (const auto& c : config.at("cells")) {
            cells.emplace_back(c.at("q").get<int>(), c.at("p").get<int>());
        }
    }
    if (cells.empty()) throw input_error("nctorus suite needs cells or coprime_probe");

    const auto len = nctorus::euclidean_length(2);
    std::vector<std::vector<std::string>> rows;
    json certs = json::array();
    double max_diam_lower = 0.0;
    double max_rank = 0.0;
    double worst_eps = 0.0;
    for (const auto& [q, p] : cells) {
        Eigen::MatrixXi pm = Eigen::MatrixXi::Zero(2, 2);
        pm(0, 1) = p;
        pm(1, 0) = -p;
        auto spec = nctorus::clock_shift_algebra(2, q, pm);
        auto l = nctorus::torus_lip_norm(spec, len);
        const int n = std::min(cesaro, q - 1);
        const double bound = nctorus::fejer_bound(n, 2, len);
        const double eps = bound + margin;
        nctorus::RcpOptions opts;
        opts.seed = mix_seed(seed, 100 * q + p);
        auto cert = nctorus::rcp_upper(spec, l, eps, opts);
        auto afn = nctorus::afn_upper(spec, l, eps, opts);
        rows.push_back({std::to_string(q), std::to_string(p), std::to_string(n),
                        io::format_double(bound), io::format_double(cert.achieved_defect),
                        cert.ok ? std::to_string(cert.rank) : "fail"});
        json cj;
        cj["q"] = q;
        cj["p"] = p;
        cj["cesaro"] = cert.cesaro_degree;
        cj["ok"] = cert.ok;
        cj["rank"] = cert.rank;
        cj["achieved_defect"] = cert.achieved_defect;
        cj["target_eps"] = cert.target_eps;
        cj["alpha_map"] = io::matrix_to_json(cert.alpha_map);
        certs.push_back(std::move(cj));
        if (!cert.ok) worst_eps = std::max(worst_eps, cert.achieved_defect);
        max_rank = std::max(max_rank, static_cast<double>(afn.rank));

        metrics::DiameterOptions dopts;
        dopts.seed = mix_seed(seed, 7 * q + p);
        dopts.directions = 64;
        auto diam = metrics::diameter(*l, 1, dopts);
        max_diam_lower = std::max(max_diam_lower, diam.lower.value);

        metrics::MetricEstimate rank_est;
        rank_est.value = static_cast<double>(afn.rank);
        rank_est.kind = metrics::MetricEstimate::Kind::upper;
        rank_est.seed = opts.seed;
        push_quantity(record,
                      "nctorus/q" + std::to_string(q) + "_p" + std::to_string(p) + "/afn_rank",
                      rank_est);
    }
    io::write_csv(out_dir / "nctorus.csv",
                  {"q", "p", "n", "fejer_bound", "achieved_eps", "rank"}, rows);
    io::save_json(out_dir / "certificates.json", certs);

    // total-boundedness certificate data: diameter cap and the rank function
    json tb;
    tb["max_diameter_lower"] = max_diam_lower;
    tb["afn_rank_max"] = max_rank;
    record["total_boundedness"] = tb;
    return exit_ok;
}

} // namespace

RunResult run(const json& config, const fs::path& out_dir) {
    if (!config.contains("suite")) throw input_error("config: missing suite");
    if (!config.contains("seed")) throw input_error("config: seed is mandatory");
    const std::string suite = config.at("suite").get<std::string>();
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();

    fs::create_directories(out_dir);

    RunResult result;
    result.record["config_hash"] = config_hash(config);
    result.record["suite"] = suite;
    result.record["seed"] = seed;
    result.record["library_version"] = library_version;
    result.record["quantities"] = json::array();

    if (suite == "validate") {
        result.exit_code = run_validate(config, result.record, out_dir, seed);
    } else if (suite == "distance") {
        result.exit_code = run_distance(config, result.record, out_dir, seed);
    } else if (suite == "berezin") {
        result.exit_code = run_berezin(config, result.record, out_dir, seed);
    } else if (suite == "nctorus") {
        result.exit_code = run_nctorus(config, result.record, out_dir, seed);
    } else if (suite == "report") {
        std::vector<json> records;
        for (const auto& p : config.at("records")) {
            records.push_back(io::load_json(p.get<std::string>()));
        }
        result.record = report(records, out_dir);
    } else {
        throw input_error("unknown suite: " + suite);
    }

    io::save_json(out_dir / "result.json", result.record);
    result.outputs.push_back(out_dir / "result.json");
    return result;
}

json report(const std::vector<json>& records, const fs::path& out_dir) {
    if (records.empty()) throw input_error("report: needs at least one record");
    std::set<std::string> suites_seen;
    for (const auto& r : records) suites_seen.insert(r.at("suite").get<std::string>());
    if (suites_seen.size() > 1) {
        throw input_error("report: records from incompatible suites cannot be merged");
    }

    json merged;
    merged["suite"] = "report";
    merged["source_suite"] = *suites_seen.begin();
    merged["records"] = static_cast<int>(records.size());

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        for (const auto& q : r.at("quantities")) {
            const std::string kind = q.value("kind", "heuristic");
            const bool certified = kind == "exact" || kind == "upper" || kind == "lower";
            rows.push_back({q.at("name").get<std::string>(), kind,
                            certified ? io::format_double(q.at("value").get<double>()) : "",
                            certified ? "" : io::format_double(q.at("value").get<double>())});
        }
    }
    std::sort(rows.begin(), rows.end());
    io::write_csv(out_dir / "summary.csv",
                  {"name", "kind", "certified_value", "heuristic_value"}, rows);
    merged["rows"] = static_cast<int>(rows.size());
    return merged;
}

} // namespace cqms::suites
