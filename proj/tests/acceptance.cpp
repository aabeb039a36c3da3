// acceptance.cpp — end-to-end acceptance suite; prints one pass/fail line per
// criterion and exits with the number of failures

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cqms/berezin.hpp"
#include "cqms/metrics.hpp"
#include "cqms/nctorus.hpp"
#include "cqms/suites.hpp"

using namespace cqms;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

nctorus::TorusSpec torus_spec(int q, int p01) {
    Eigen::MatrixXi p = Eigen::MatrixXi::Zero(2, 2);
    p(0, 1) = p01;
    p(1, 0) = -p01;
    return nctorus::clock_shift_algebra(2, q, p);
}

opsys::UcpMap two_point_map(const lip::TwoPoint& tp, const CMatrix& a) {
    opsys::UcpMap phi;
    phi.system = tp.system;
    phi.n = a.rows();
    phi.images.push_back(CMatrix::Identity(a.rows(), a.rows()));
    phi.images.push_back(CMatrix::Identity(a.rows(), a.rows()) - a);
    return phi;
}

CMatrix random_effect(Rng& rng, Eigen::Index n) {
    CMatrix h = rng.hermitian(n);
    auto dec = eigh(h);
    RVector squashed = dec.eigenvalues.unaryExpr([](double t) {
        return 0.5 + 0.5 * std::tanh(t);
    });
    return dec.eigenvectors * squashed.asDiagonal() * dec.eigenvectors.adjoint();
}

// 1. Choi correspondence round trip, 1e-12, 100 random UCP maps
Outcome criterion_choi() {
    std::vector<opsys::SystemPtr> systems = {opsys::full_matrix_system(2),
                                             opsys::full_matrix_system(3),
                                             opsys::diagonal_system(4)};
    double worst = 0.0;
    int count = 0;
    for (const auto& sys : systems) {
        for (Eigen::Index n : {1, 2, 3}) {
            for (int rep = 0; rep < 12; ++rep, ++count) {
                auto phi = opsys::random_ucp(sys, n, 1000 + count);
                auto back = opsys::map_of_state_unchecked(opsys::state_of_map(phi));
                for (std::size_t l = 0; l < phi.images.size(); ++l) {
                    worst = std::max(worst,
                                     operator_norm(CMatrix(back.images[l] - phi.images[l])));
                }
            }
        }
    }
    Outcome out;
    out.pass = count >= 100 && worst <= 1e-12;
    std::ostringstream ss;
    ss << count << " maps, worst round-trip error " << worst;
    out.detail = ss.str();
    return out;
}

// 2. Two-point oracle: search engine matches d·‖A−B‖ within 1e-6
Outcome criterion_two_point_oracle() {
    const double d = 2.0;
    lip::TwoPoint tp = lip::make_two_point(d);
    Rng rng(77);
    double worst = 0.0;
    for (Eigen::Index n : {1, 2, 3}) {
        for (int rep = 0; rep < 50; ++rep) {
            CMatrix a = random_effect(rng, n);
            CMatrix b = random_effect(rng, n);
            metrics::RhoOptions opts;
            opts.allow_closed_form = false;
            opts.seed = 500 + 100 * n + rep;
            const double engine =
                metrics::rho_ln(*tp.lip, n, two_point_map(tp, a), two_point_map(tp, b), opts)
                    .value;
            worst = std::max(worst, std::abs(engine - metrics::two_point_rho_oracle(d, a, b)));
        }
    }
    Outcome out;
    out.pass = worst <= 1e-6;
    out.detail = "worst |engine − oracle| = " + std::to_string(worst);
    return out;
}

// 3. Diameter coincidence across n ∈ {1,2,3} within 0.05
Outcome criterion_diameter_coincidence() {
    struct Case {
        std::string label;
        lip::LipNormPtr lip;
    };
    std::vector<Case> cases;
    cases.push_back({"two_point_d2", lip::make_two_point(2.0).lip});
    {
        auto spec = torus_spec(3, 1);
        cases.push_back({"torus_q3",
                         nctorus::torus_lip_norm(spec, nctorus::euclidean_length(2), 8, 4)});
    }
    Outcome out;
    out.pass = true;
    std::ostringstream ss;
    for (const auto& c : cases) {
        double lo = 1e300, hi = 0.0;
        for (Eigen::Index n : {1, 2, 3}) {
            metrics::DiameterOptions opts;
            opts.seed = 40 + n;
            opts.directions = n == 1 ? 512 : 128;
            opts.polish_rounds = 8;
            opts.net_random = 8;
            opts.net_compressions = 4;
            opts.rho.directions = 24;
            opts.rho.polish_starts = 2;
            opts.rho.alternations = 3;
            const double v = metrics::diameter(*c.lip, n, opts).lower.value;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        ss << c.label << " spread " << (hi - lo) << "  ";
        out.pass = out.pass && (hi - lo) <= 0.05;
    }
    out.detail = ss.str();
    return out;
}

// 4. ‖x − r·1‖ ≤ (L(x)+1e-9)(diameter upper + 0.05) on 1000 elements per system
Outcome criterion_norm_bound() {
    struct Case {
        std::string label;
        lip::LipNormPtr lip;
    };
    std::vector<Case> cases;
    cases.push_back({"two_point_d2", lip::make_two_point(2.0).lip});
    cases.push_back({"torus_q3", nctorus::torus_lip_norm(torus_spec(3, 1),
                                                         nctorus::euclidean_length(2), 8, 4)});
    Outcome out;
    out.pass = true;
    std::ostringstream ss;
    for (const auto& c : cases) {
        auto diam_up = c.lip->diameter_upper();
        if (!diam_up) {
            out.pass = false;
            ss << c.label << ": no diameter upper estimate  ";
            continue;
        }
        const auto& sys = *c.lip->system();
        Rng rng(mix_seed(99, c.label));
        double worst_excess = -1e300;
        for (int s = 0; s < 1000; ++s) {
            RVector z = rng.gaussian_vector(sys.hermitian_dim() - 1);
            CVector coeff = CVector::Zero(sys.dim());
            for (Eigen::Index i = 1; i < sys.hermitian_dim(); ++i) {
                coeff += z(i - 1) * sys.sa_basis_coeffs()[i];
            }
            const CMatrix x = sys.to_matrix(coeff);
            auto dec = eigh(x);
            const double dist = dec.eigenvalues(dec.eigenvalues.size() - 1) -
                                dec.eigenvalues(0); // ‖x − r1‖ for r = min spectrum
            const double lx = c.lip->eval(coeff).value;
            worst_excess = std::max(worst_excess,
                                    dist - (lx + 1e-9) * (*diam_up + 0.05));
        }
        ss << c.label << " worst excess " << worst_excess << "  ";
        out.pass = out.pass && worst_excess <= 0.0;
    }
    out.detail = ss.str();
    return out;
}

// 5. Bridge bounds: scaling C/λ, norm ε, quotient ε+η, point-bridge γ→0
Outcome criterion_bridge_bounds() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;

    // scaling family on the unit-diameter two-point system
    lip::TwoPoint unit = lip::make_two_point(1.0);
    auto point = lip::make_point_lip();
    for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
        auto scaled = lip::make_scaled_lip(unit.lip, lambda);
        metrics::DistUpperOptions opts;
        opts.seed = 5;
        auto est = metrics::dist_upper(scaled, point,
                                       metrics::make_scaling_bridge(lambda, 1.0), opts);
        if (est.kind != metrics::MetricEstimate::Kind::upper ||
            std::abs(est.value - 1.0 / lambda) > 1e-12) {
            out.pass = false;
            ss << "scaling λ=" << lambda << " off  ";
        }
    }

    // norm and quotient bridges
    lip::TwoPoint tp = lip::make_two_point(2.0);
    {
        metrics::DistUpperOptions opts;
        opts.seed = 6;
        auto est = metrics::dist_upper(tp.lip, tp.lip, metrics::make_norm_bridge(0.1), opts);
        if (std::abs(est.value - 0.1) > 1e-12) {
            out.pass = false;
            ss << "norm bridge off  ";
        }
    }
    {
        metrics::DistUpperOptions opts;
        opts.seed = 7;
        auto bridge = metrics::make_quotient_bridge(0.01, CMatrix::Identity(2, 2), 0.05);
        auto est = metrics::dist_upper(tp.lip, tp.lip, bridge, opts);
        if (std::abs(est.value - 0.06) > 1e-12) {
            out.pass = false;
            ss << "quotient bridge off  ";
        }
    }

    // point bridge: γ → 0 extrapolation reproduces diam + diam
    {
        lip::TwoPoint x = lip::make_two_point(2.0);
        lip::TwoPoint y = lip::make_two_point(1.0);
        metrics::DiameterOptions dopts;
        dopts.seed = 8;
        const double dx = metrics::diameter(*x.lip, 1, dopts).lower.value;
        const double dy = metrics::diameter(*y.lip, 1, dopts).lower.value;
        std::vector<double> gammas = {0.4, 0.2, 0.1, 0.05};
        std::vector<double> bounds;
        for (double g : gammas) {
            auto bridge = metrics::make_point_bridge(
                g, opsys::tracial_state_values(*x.system),
                opsys::tracial_state_values(*y.system), dx, dy);
            metrics::DistUpperOptions opts;
            opts.seed = 9;
            bounds.push_back(metrics::dist_upper(x.lip, y.lip, bridge, opts).value);
        }
        // least-squares line through (γ, bound); intercept ≈ diam + diam
        double sg = 0, sb = 0, sgg = 0, sgb = 0;
        const double m = gammas.size();
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            sg += gammas[i];
            sb += bounds[i];
            sgg += gammas[i] * gammas[i];
            sgb += gammas[i] * bounds[i];
        }
        const double slope = (m * sgb - sg * sb) / (m * sgg - sg * sg);
        const double intercept = (sb - slope * sg) / m;
        if (std::abs(intercept - 3.0) > 0.05) {
            out.pass = false;
        }
        ss << "point-bridge intercept " << intercept << " (target 3)";
    }
    out.detail = ss.str();
    return out;
}

// 6. Fiber neighborhood inequality suite on two admissible pairs
Outcome criterion_neighborhoods() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;

    // pair A: identical two-point summands under a norm bridge, r = ε
    {
        lip::TwoPoint tp = lip::make_two_point(1.0);
        const double eps = 0.1;
        auto la = metrics::certify_admissible(
            lip::make_direct_sum_lip(tp.lip, tp.lip, metrics::make_norm_bridge(eps)), 14);
        if (!la.certified) {
            out.pass = false;
            ss << "pair A admissibility failed  ";
        } else {
            for (Eigen::Index n : {1, 2}) {
                opsys::BlockElement x, xp;
                x.n = n;
                xp.n = n;
                x.entries.assign(n * n, CVector::Zero(2));
                xp.entries.assign(n * n, CVector::Zero(2));
                CVector c(2), cp(2);
                c << 0.9, -0.8; // diag(0.9, 0.1) ≥ 0, L = 0.8
                cp << 0.75, -0.6;
                for (Eigen::Index i = 0; i < n; ++i) {
                    x.entry(i, i) = c;
                    xp.entry(i, i) = cp;
                }
                metrics::NeighborhoodOptions no;
                no.witnesses = 6;
                no.seed = 20 + n;
                auto rep = metrics::check_diambound(la, n, x, xp, 2.0, eps, no);
                if (!rep.conclusive || !rep.ok) {
                    out.pass = false;
                    ss << "pair A n=" << n << " " << (rep.conclusive ? "violated" : "no witness")
                       << "  ";
                }
            }
        }
    }

    // pair B: two-point against the one-point system under a scaling bridge
    {
        lip::TwoPoint tp = lip::make_two_point(2.0);
        const double lambda = 4.0, big_c = 2.0;
        auto scaled = lip::make_scaled_lip(tp.lip, lambda);
        auto la = metrics::certify_admissible(
            lip::make_direct_sum_lip(scaled, lip::make_point_lip(),
                                     metrics::make_scaling_bridge(lambda, big_c)),
            15);
        if (!la.certified) {
            out.pass = false;
            ss << "pair B admissibility failed  ";
        } else {
            opsys::BlockElement x, xp;
            x.n = 1;
            xp.n = 1;
            CVector c(2), cp(2);
            c << 0.25, -0.2; // psd anchor with λL(x) = 0.4 under the scaled norm
            cp << 0.2, -0.16;
            x.entries = {c};
            xp.entries = {cp};
            metrics::NeighborhoodOptions no;
            no.witnesses = 6;
            no.seed = 23;
            auto rep = metrics::check_diambound(la, 1, x, xp, 1.2, big_c / lambda, no);
            if (!rep.conclusive || !rep.ok) {
                out.pass = false;
                ss << "pair B " << (rep.conclusive ? "violated" : "no witness") << "  ";
            }
        }
    }
    if (out.pass) ss << "all sampled inequalities hold";
    out.detail = ss.str();
    return out;
}

// 7. Fejér suite: closed form, normalization, and the approximation inequality
Outcome criterion_fejer() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;

    double worst_form = 0.0;
    for (int n : {1, 3, 6}) {
        for (int i = 0; i < 10000; ++i) {
            const double t = static_cast<double>(i) / 10000.0;
            Complex sum = 0.0;
            for (int k = -n; k <= n; ++k) {
                sum += (1.0 - std::abs(k) / (n + 1.0)) * std::polar(1.0, 2.0 * pi * k * t);
            }
            worst_form = std::max(worst_form,
                                  std::abs(nctorus::fejer_kernel(n, t) - sum.real()));
        }
        double integral = 0.0;
        const int grid = 8192;
        for (int i = 0; i < grid; ++i) {
            integral += nctorus::fejer_kernel(n, static_cast<double>(i) / grid);
        }
        integral /= grid;
        if (std::abs(integral - 1.0) > 1e-8) {
            out.pass = false;
            ss << "normalization off at n=" << n << "  ";
        }
    }
    if (worst_form > 1e-10) out.pass = false;
    ss << "closed-form error " << worst_form << "  ";

    // display inequality on 100 random Lip-≤1 polynomials, q = 8
    auto spec = torus_spec(8, 3);
    auto l = nctorus::torus_lip_norm(spec, nctorus::euclidean_length(2));
    Rng rng(31);
    double worst_slack = -1e300;
    int checked = 0;
    for (int n : {2, 4, 6}) {
        const double bound = nctorus::fejer_bound(n, 2, nctorus::euclidean_length(2));
        for (int s = 0; s < 34; ++s, ++checked) {
            nctorus::FourierPolynomial poly;
            poly.d = 2;
            for (int k1 = -3; k1 <= 3; ++k1) {
                for (int k2 = -3; k2 <= 3; ++k2) {
                    if (k1 == 0 && k2 == 0) continue;
                    poly.add({k1, k2}, rng.gaussian_complex());
                }
            }
            CMatrix a = nctorus::to_matrix(spec, poly);
            const double lx = l->eval(spec.system->coefficients(a)).value;
            a /= lx;
            const double defect = operator_norm(CMatrix(a - nctorus::cesaro_mean(spec, a, n)));
            worst_slack = std::max(worst_slack, defect - bound);
        }
    }
    ss << checked << " polynomials, worst defect−bound " << worst_slack;
    if (worst_slack > 1e-6) out.pass = false;
    out.detail = ss.str();
    return out;
}

// 8. Berezin suite: symbol positivity/unitality and the j-trend
Outcome criterion_berezin() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;
    berezin::SphereGrid grid = berezin::make_grid();
    Rng rng(37);

    for (double j : {0.5, 2.0, 8.0}) {
        berezin::SpinRep rep = berezin::make_spin(j);
        // σ unital and positive
        auto one = berezin::covariant_symbol(CMatrix::Identity(rep.dim, rep.dim), rep, grid);
        for (Eigen::Index i = 0; i < one.values.size(); ++i) {
            if (std::abs(one.values(i) - Complex(1, 0)) > 1e-10) out.pass = false;
        }
        CMatrix g = rng.ginibre(rep.dim, rep.dim);
        CMatrix psd = g * g.adjoint();
        auto f = berezin::covariant_symbol(psd, rep, grid);
        for (Eigen::Index i = 0; i < f.values.size(); ++i) {
            if (f.values(i).real() < -1e-10) out.pass = false;
        }
        // σ̆ unital within 1e-6 and positive on positive functions
        berezin::SphereFunction ones;
        ones.values = CVector::Ones(grid.size());
        if (operator_norm(CMatrix(berezin::contravariant_symbol(ones, rep, grid) -
                                  CMatrix::Identity(rep.dim, rep.dim))) > 1e-6) {
            out.pass = false;
            ss << "resolution of identity failed at j=" << j << "  ";
        }
        if (!is_psd(berezin::contravariant_symbol(f, rep, grid))) out.pass = false;
    }

    auto low = berezin::make_spin(0.5);
    auto high = berezin::make_spin(8.0);
    const double r_low = berezin::berezin_residual(CMatrix(low.jz / 0.5), low, grid);
    const double r_high = berezin::berezin_residual(CMatrix(high.jz / 8.0), high, grid);
    ss << "residual " << r_low << " -> " << r_high << "  ";
    if (!(r_high < 0.5 * r_low)) out.pass = false;

    auto lips_low = berezin::sphere_lip_norms(low, {pi / 4, pi / 2});
    auto lips_high = berezin::sphere_lip_norms(high, {pi / 4, pi / 2});
    auto g_low = berezin::bridge_gamma_estimate(low, grid, lips_low, 6, 41);
    auto g_high = berezin::bridge_gamma_estimate(high, grid, lips_high, 6, 41);
    ss << "gamma " << g_low.gamma << " -> " << g_high.gamma;
    if (!(g_high.gamma < g_low.gamma)) out.pass = false;
    return {out.pass, ss.str()};
}

// 9. Rcp/Afn certificates and the phase-uniformity probe
Outcome criterion_rcp_afn() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;
    const auto len = nctorus::euclidean_length(2);
    const double eps = nctorus::fejer_bound(2, 2, len) + 0.05;

    auto spec = torus_spec(5, 1);
    auto l = nctorus::torus_lip_norm(spec, len);
    nctorus::RcpOptions opts;
    opts.seed = 61;
    auto cert = nctorus::rcp_upper(spec, l, eps, opts);
    if (!cert.ok) {
        out.pass = false;
        ss << "certificate not found  ";
    } else {
        const double fresh = nctorus::recheck_defect(spec, l, cert, 96, 987654);
        ss << "rank " << cert.rank << ", defect " << cert.achieved_defect << ", recheck "
           << fresh << "  ";
        if (fresh >= eps) out.pass = false;
        auto afn = nctorus::afn_upper(spec, l, eps, opts);
        if (!(afn.rank <= cert.rank)) out.pass = false;
        if (!afn.quotient_lip ||
            !lip::validate_lipnorm(*afn.quotient_lip, Rng(62), 12).ok) {
            out.pass = false;
            ss << "quotient pair invalid  ";
        }
    }

    // spread of achieved defects across coprime phases, per q
    double worst_spread = 0.0;
    for (int q = 4; q <= 8; ++q) {
        double lo = 1e300, hi = 0.0;
        for (int p01 = 1; p01 < q; ++p01) {
            if (std::gcd(p01, q) != 1) continue;
            auto s2 = torus_spec(q, p01);
            auto l2 = nctorus::torus_lip_norm(s2, len);
            nctorus::RcpOptions o2;
            o2.seed = 63;
            auto c2 = nctorus::rcp_upper(s2, l2, eps, o2);
            if (!c2.ok) {
                out.pass = false;
                ss << "q=" << q << " p=" << p01 << " failed  ";
                continue;
            }
            lo = std::min(lo, c2.achieved_defect);
            hi = std::max(hi, c2.achieved_defect);
        }
        if (hi > 0.0) worst_spread = std::max(worst_spread, (hi - lo) / (0.5 * (hi + lo)));
    }
    ss << "worst phase spread " << worst_spread;
    if (worst_spread >= 0.10) out.pass = false;
    out.detail = ss.str();
    return out;
}

// 10. f-Leibniz checker: clean pass on action norms, detection of a violation
Outcome criterion_leibniz() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;

    for (int q : {3, 5}) {
        auto spec = torus_spec(q, 1);
        auto l = nctorus::torus_lip_norm(spec, nctorus::euclidean_length(2), 8, 4);
        auto rep = lip::check_f_leibniz(*l, lip::leibniz_rule, 500, 71 + q, 1e-8);
        ss << "q=" << q << " max violation " << rep.max_violation << "  ";
        if (!rep.ok || !rep.usual_leibniz) out.pass = false;
    }

    auto sys = opsys::full_matrix_system(2);
    auto one = [](Complex v) {
        CMatrix m(1, 1);
        m(0, 0) = v;
        return m;
    };
    std::vector<std::vector<CMatrix>> maps(3);
    maps[0] = {one(0), one(0), one(0), one(-10.0)};
    maps[1] = {one(0), one(1e-2), one(0), one(0)};
    maps[2] = {one(0), one(0), one(1e-2), one(0)};
    auto crafted = lip::make_functional_lip(sys, maps);
    auto rep = lip::check_f_leibniz(*crafted, lip::leibniz_rule, 500, 73, 1e-8);
    if (rep.ok) {
        out.pass = false;
        ss << "counterexample not detected";
    } else {
        ss << "counterexample violation " << rep.max_violation;
    }
    out.detail = ss.str();
    return out;
}

// 11. Determinism: identical config + seed reproduce result files byte for byte
Outcome criterion_determinism() {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;
    const fs::path base = fs::temp_directory_path() / "cqms_acceptance";
    fs::remove_all(base);

    io::json config;
    config["suite"] = "nctorus";
    config["seed"] = 2024;
    config["cells"] = io::json::array({io::json{{"q", 5}, {"p", 2}}});
    config["cesaro"] = 2;
    config["margin"] = 0.05;

    auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };

    suites::run(config, base / "a");
    suites::run(config, base / "b");
    for (const char* name : {"result.json", "nctorus.csv", "certificates.json"}) {
        if (read_bytes(base / "a" / name) != read_bytes(base / "b" / name)) {
            out.pass = false;
            ss << name << " differs  ";
        }
    }

    io::json dconf;
    dconf["suite"] = "distance";
    dconf["seed"] = 9;
    dconf["experiments"] = io::json::array(
        {io::json{{"kind", "scaling_family"}, {"d", 1.0}, {"C", 1.0},
                  {"lambdas", io::json::array({1, 2, 4, 8})}}});
    suites::run(dconf, base / "c");
    suites::run(dconf, base / "d");
    if (read_bytes(base / "c" / "result.json") != read_bytes(base / "d" / "result.json")) {
        out.pass = false;
        ss << "distance result.json differs  ";
    }
    if (out.pass) ss << "bit-identical reruns";
    out.detail = ss.str();
    return out;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"choi round trip exact to 1e-12", criterion_choi},
        {"two-point metric oracle within 1e-6", criterion_two_point_oracle},
        {"diameter coincidence across levels within 0.05", criterion_diameter_coincidence},
        {"spectral norm bound against the diameter estimate", criterion_norm_bound},
        {"bridge-certified distance bounds", criterion_bridge_bounds},
        {"fiber neighborhood inequalities", criterion_neighborhoods},
        {"fejer kernel and approximation inequality", criterion_fejer},
        {"berezin symbols and convergence trends", criterion_berezin},
        {"rcp/afn certificates and phase uniformity", criterion_rcp_afn},
        {"f-leibniz checker", criterion_leibniz},
        {"bit-exact determinism of suite reruns", criterion_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        std::printf("[%s] %2zu. %s — %s (%lld ms)\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, out.detail.c_str(), static_cast<long long>(ms));
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    } else {
        std::printf("acceptance: %d criteria FAILED\n", failures);
    }
    return failures;
}
