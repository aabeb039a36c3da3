// metrics.hpp — metrics on matrix state spaces: the Lip-ball sup metric between
// u.c.p. maps, diameters, Hausdorff estimates between matrix state spaces,
// admissible direct-sum Lip-norms, bridge-certified distance upper bounds, and
// the fiber-neighborhood inequality checks

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqms/bridge.hpp"
#include "cqms/lipnorm.hpp"
#include "cqms/opsys.hpp"

namespace cqms::metrics {

struct Witness {
    std::string label;
    std::optional<CVector> element;   // coefficients in the relevant system
    std::optional<RVector> sa_coords; // quotient coordinates, when that is the natural form
    double recorded_value = 0.0;
};

struct MetricEstimate {
    double value = 0.0;
    enum class Kind { exact, upper, lower, heuristic } kind = Kind::heuristic;
    Eigen::Index n = 1;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;
    std::vector<Witness> witnesses;

    static const char* kind_name(Kind k);
};

struct RhoOptions {
    int directions = 48;
    int polish_starts = 4;
    int alternations = 4;
    int linmax_starts = 2;
    int linmax_iters = 80;
    std::uint64_t seed = 1;
    bool allow_closed_form = true; // exact evaluation when the quotient is one-dimensional
};

// ρ_{L,n}(φ, ψ) = sup { ‖φ(x) − ψ(x)‖ : x self-adjoint, L(x) ≤ 1 }.
// Exact for quotient dimension ≤ 1; otherwise a certified lower bound with a
// stored witness direction.
MetricEstimate rho_ln(const lip::LipNorm& lip, Eigen::Index n, const opsys::UcpMap& phi,
                      const opsys::UcpMap& psi, const RhoOptions& opts = {});

// Closed form for the two-point system: ρ = d·‖A − B‖ where φ(diag(a,b)) =
// a·A + b·(1 − A).
double two_point_rho_oracle(double d, const CMatrix& a, const CMatrix& b);

struct DiameterOptions {
    int directions = 256;
    int polish_rounds = 6;
    int net_random = 10;
    int net_compressions = 6;
    std::uint64_t seed = 1;
    RhoOptions rho; // used for the pairwise net stage at n ≥ 2
};

struct DiameterEstimate {
    MetricEstimate lower;         // net / width search
    std::optional<double> upper;  // coercivity bound 2/α when available
};

DiameterEstimate diameter(const lip::LipNorm& lip, Eigen::Index n,
                          const DiameterOptions& opts = {});

// Direct-sum Lip-norm together with its membership certificate: the induced
// quotients agree with the summand Lip-norms on sampled directions.
struct AdmissibleLip {
    lip::LipNormPtr lip; // direct-sum variant
    bool certified = false;
    double worst_defect = 0.0;
    std::string detail;

    const lip::DirectSumLip& parts() const;
};

AdmissibleLip certify_admissible(lip::LipNormPtr direct_sum_lip, std::uint64_t seed,
                                 int samples_per_side = 12, double tol = 1e-6);

struct BridgeReport {
    bool ok = false;
    bool condition_i = false;
    double worst_gap = 0.0; // max over samples of (min_b max(L_Y(b), N(a,b)) − L_X(a))
    RVector worst_witness;
    std::string detail;
};

// Sampled check of the two bridge conditions against a δ-grid.
BridgeReport validate_bridge(const Bridge& bridge, const lip::LipNormPtr& lip_x,
                             const lip::LipNormPtr& lip_y, const std::vector<double>& delta_grid,
                             std::uint64_t seed, int samples = 16);

// Embeds a u.c.p. map on a summand as a map on the direct sum.
opsys::UcpMap embed_left(const AdmissibleLip& la, const opsys::UcpMap& phi);
opsys::UcpMap embed_right(const AdmissibleLip& la, const opsys::UcpMap& psi);

struct MatchOptions {
    int test_directions = 32;
    int net_size = 8;
    int descent_iterations = 120;
    std::uint64_t seed = 1;
    RhoOptions rho;
};

struct MatchResult {
    opsys::UcpMap match;    // u.c.p. map on the other summand
    MetricEstimate rho_est; // ρ_{L,n} between the embedded pair
};

// Best u.c.p. map on the opposite summand approximating φ under ρ_{L,n},
// found by multi-start Choi-parametrized local descent. φ lives on the
// summand indicated by from_left.
MatchResult match_ucp(const AdmissibleLip& la, const opsys::UcpMap& phi, bool from_left,
                      const MatchOptions& opts = {});

struct HausdorffOptions {
    int net_size = 8;
    std::uint64_t seed = 1;
    MatchOptions match;
};

// Heuristic bracket on the Hausdorff distance between the two matrix state
// spaces inside the direct sum at level n.
MetricEstimate hausdorff_ucp(const AdmissibleLip& la, Eigen::Index n,
                             const HausdorffOptions& opts = {});

struct DistUpperOptions {
    Eigen::Index n_max = 2;
    std::uint64_t seed = 1;
    HausdorffOptions hausdorff;
    std::vector<double> delta_grid = {0.05, 0.1};
    int bridge_samples = 12;
};

// Bridge-certified upper bound on the complete distance: the analytic uniform
// bound when the construction carries one, else a heuristic Hausdorff sweep
// over n ≤ n_max. Throws validation_error when the bridge fails validation.
MetricEstimate dist_upper(const lip::LipNormPtr& lip_x, const lip::LipNormPtr& lip_y,
                          const Bridge& bridge, const DistUpperOptions& opts = {});

struct NeighborhoodReport {
    bool conclusive = false;
    int witnesses_found = 0;
    double norm_bound = 0.0;        // required bound ‖x‖ + 2λn⁴r for sa witnesses
    double worst_norm = 0.0;        // largest sa witness norm observed
    double diameter_bound = 0.0;    // 8λn⁴r
    double sampled_diameter = 0.0;  // over found witnesses
    double cross_bound = 0.0;       // 8λn⁴r + 4‖x−x'‖
    double sampled_cross = 0.0;
    double positivity_floor = 0.0;  // −2λn⁴r
    double worst_min_eig = 0.0;     // over sa witnesses, when x ≥ 0
    bool ok = false;
    std::string detail;
};

struct NeighborhoodOptions {
    int witnesses = 8;
    std::uint64_t seed = 1;
    double slack = 1e-6;
};

// Samples the fiber neighborhood {z : L^n(x, z) ≤ λ} on the Y side and checks
// the norm, diameter, cross-anchor and near-positivity inequalities against a
// Hausdorff-distance estimate r at level n.
NeighborhoodReport check_diambound(const AdmissibleLip& la, Eigen::Index n,
                                   const opsys::BlockElement& x,
                                   const opsys::BlockElement& x_prime, double lambda, double r,
                                   const NeighborhoodOptions& opts = {});

} // namespace cqms::metrics
