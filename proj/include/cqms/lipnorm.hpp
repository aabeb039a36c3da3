// lipnorm.hpp — Lip-norm representations and evaluators: action-induced,
// functional, quotient, scaled and direct-sum variants; the adjoint-invariant
// extension, entrywise matrix seminorms, axiom validation and the f-Leibniz
// checker

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cqms/bridge.hpp"
#include "cqms/opsys.hpp"
#include "cqms/rng.hpp"

namespace cqms::lip {

// Automorphism of the ambient algebra preserving the system. Stored either as
// a unitary acting by conjugation, as a k²×k² linear map on vec(x), or as an
// m×m map on basis coefficients (exact for gauge actions on spanned systems).
struct Automorphism {
    enum class Kind { unitary_conjugation, ambient_linear, coefficient };
    Kind kind = Kind::unitary_conjugation;
    CMatrix matrix;

    CVector apply_coeff(const opsys::OperatorSystem& sys, const CVector& coeff) const;
    CMatrix apply_matrix(const opsys::OperatorSystem& sys, const CMatrix& x) const;
};

class LipNorm;
using LipNormPtr = std::shared_ptr<const LipNorm>;

namespace detail {
struct BranchSet; // exact max-of-norms form, cached at construction
}

// L(x) = max_g ‖γ_g(x) − x‖ / ℓ(g) over the finite sample of group elements.
struct ActionLip {
    std::vector<Automorphism> automorphisms;
    std::vector<double> lengths;
};

// L(x) = max_i ‖T_i(x)‖ with T_i(1) = 0; maps[i][l] = T_i(b_l).
struct FunctionalLip {
    std::vector<std::vector<CMatrix>> maps;
};

// L_Y(y) = inf { L_parent(x) : Φ(x) = y }; phi maps parent coefficients to
// coefficients of this system.
struct QuotientLip {
    LipNormPtr parent;
    CMatrix phi; // m_this × m_parent
};

struct ScaledLip {
    LipNormPtr inner;
    double factor = 1.0;
};

// L(x,y) = max(L_X(x), L_Y(y), N(x,y)) on the direct-sum system.
struct DirectSumLip {
    LipNormPtr left;
    LipNormPtr right;
    metrics::Bridge bridge;
    opsys::DirectSum split;
};

struct SeminormValue {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    enum class Kind { exact, bracketed } kind = Kind::exact;

    static SeminormValue exact(double v) { return {v, v, v, Kind::exact}; }
    static SeminormValue bracketed(double lo, double hi) {
        return {hi, lo, hi, Kind::bracketed};
    }
};

class LipNorm : public std::enable_shared_from_this<LipNorm> {
public:
    using Variant = std::variant<ActionLip, FunctionalLip, QuotientLip, ScaledLip, DirectSumLip>;

    LipNorm(opsys::SystemPtr system, Variant variant);

    const opsys::SystemPtr& system() const { return system_; }
    const Variant& variant() const { return variant_; }

    // The defining seminorm formula on an arbitrary element of the span; this
    // is the adjoint-invariant extension used by the f-Leibniz checker. Exact
    // for action/functional/scaled/direct-sum, bracketed for quotients.
    SeminormValue eval(const CVector& coeff) const;
    SeminormValue eval_matrix(const CMatrix& x) const;

    // Value and a subgradient with respect to (Re c, Im c); drives the convex
    // searches in this module and in the metric layer.
    double eval_with_grad(const CVector& coeff, CVector& grad) const;

    // Evaluation on self-adjoint quotient coordinates (sa basis elements 1..).
    double eval_sa(const RVector& quotient_coords) const;
    double eval_sa_with_grad(const RVector& quotient_coords, RVector& grad) const;

    // Extended seminorm on non-self-adjoint elements: the state-pair
    // difference-quotient sup, bracketed by
    //   max(L(Re x), L(Im x)) ≤ L^e(x) ≤ L(Re x) + L(Im x),
    // with the lower end refined by sampled state pairs.
    SeminormValue eval_e(const CVector& coeff, Rng* refine_rng = nullptr,
                         int refine_samples = 0) const;

    // L^n on M_n ⊗ X: entrywise max of the extended seminorm.
    SeminormValue eval_n(const opsys::BlockElement& x) const;

    // Certified constant α with L(x) ≥ α‖x − (tr x/k)1‖_F for self-adjoint x;
    // unavailable for direct sums.
    std::optional<double> coercivity() const { return coercivity_; }

    // 2/α when coercivity is available: a certified diameter upper bound.
    std::optional<double> diameter_upper() const;

    // Exact branch representation (null for quotient variants).
    const detail::BranchSet* branch_set() const { return branches_.get(); }

private:
    opsys::SystemPtr system_;
    Variant variant_;
    std::shared_ptr<const detail::BranchSet> branches_;
    std::optional<double> coercivity_;

    struct QuotientEval {
        double value;
        CVector parent_argmin;
    };
    QuotientEval quotient_eval(const CVector& coeff) const;

    void compute_coercivity();
};

LipNormPtr make_action_lip(opsys::SystemPtr system, std::vector<Automorphism> autos,
                           std::vector<double> lengths);
LipNormPtr make_functional_lip(opsys::SystemPtr system, std::vector<std::vector<CMatrix>> maps);
LipNormPtr make_quotient_lip(opsys::SystemPtr system, LipNormPtr parent, CMatrix phi);
LipNormPtr make_scaled_lip(LipNormPtr inner, double factor);
LipNormPtr make_direct_sum_lip(LipNormPtr left, LipNormPtr right, metrics::Bridge bridge);

// Two-point system (diagonal 2×2) with L(diag(a,b)) = |a − b| / d.
struct TwoPoint {
    opsys::SystemPtr system;
    LipNormPtr lip;
    double d = 1.0;
};
TwoPoint make_two_point(double d);

// One-point system (C, P ≡ 0).
LipNormPtr make_point_lip();

struct ValidationReport {
    bool ok = true;
    bool kernel_ok = true;
    bool seminorm_ok = true;
    bool adjoint_ok = true;
    double worst_homogeneity = 0.0;
    double worst_triangle = 0.0;
    double worst_adjoint = 0.0;
    std::vector<std::string> notes;
    std::string detail;
};

// Checks kernel = scalars (rank of the stacked defining maps), sampled
// seminorm axioms, and adjoint invariance. Closedness and weak*-metrization
// are automatic in finite dimensions and recorded as notes.
ValidationReport validate_lipnorm(const LipNorm& lip, Rng rng, int samples = 64);

struct LeibnizReport {
    bool ok = true;
    double max_violation = 0.0;
    int violations = 0;
    int samples = 0;
    bool usual_leibniz = false; // f was the usual rule ac + bd
    CVector witness_x, witness_y;
};

using LeibnizF = std::function<double(double, double, double, double)>;

// Samples pairs (x, y), evaluates L'(xy) against f(L'(x), L'(y), ‖y‖, ‖x‖).
// Requires a multiplicatively closed system and an action/functional/scaled
// Lip-norm (those formulas are finite adjoint-invariant extensions).
LeibnizReport check_f_leibniz(const LipNorm& lip, const LeibnizF& f, int samples,
                              std::uint64_t seed, double slack = 1e-8);

inline double leibniz_rule(double lx, double ly, double ny, double nx) {
    return lx * ny + ly * nx;
}

// Generic subgradient minimizer used by quotient fibers, bridge validation and
// neighborhood searches: minimizes f over R^p from z0.
struct ConvexMinResult {
    RVector argmin;
    double value = 0.0;
    int iterations = 0;
    bool stalled = false;
};

ConvexMinResult minimize_subgradient(
    const std::function<double(const RVector&, RVector&)>& value_and_grad, const RVector& z0,
    int max_iterations = 10000, double stall_tol = 1e-8);

} // namespace cqms::lip
