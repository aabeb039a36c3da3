// bridge.hpp — seminorms on direct sums used to combine two Lip-normed systems;
// the four named constructions carry analytic uniform distance bounds

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "cqms/opsys.hpp"

namespace cqms::metrics {

// N(x,y) = γ⁻¹ |σ0(x) − ω0(y)| for fixed states σ0, ω0 (values on the bases).
struct PointBridge {
    double gamma = 1.0;
    CVector sigma0;
    CVector omega0;
};

// N(x,y) = ε⁻¹ ‖x − y‖; requires equal ambient dimension.
struct NormBridge {
    double eps = 1.0;
};

// N(x,y) = η⁻¹ ‖Φ(x) − y‖ for a unital positive surjection Φ : X → Y given in
// coefficients; defect_eps is the certified sup of ‖(Γ∘Φ)(x) − x‖ over the
// Lip unit ball for the section Γ used in the analytic bound ε + η.
struct QuotientBridge {
    double eta = 1.0;
    CMatrix phi; // m_Y × m_X
    double defect_eps = 0.0;
};

// N(x,μ) = C⁻¹ λ ‖x − μ·1‖ against the one-point system.
struct ScalingBridge {
    double lambda = 1.0;
    double big_c = 1.0;
};

// N(x,y) = max_i ‖A_i(x) + B_i(y)‖ for linear matrix-valued maps given by
// their images of the basis elements.
struct FunctionalBridge {
    std::vector<std::vector<CMatrix>> x_maps; // x_maps[i][l] = A_i(b_Xl)
    std::vector<std::vector<CMatrix>> y_maps; // y_maps[i][l] = B_i(b_Yl)
};

struct Bridge {
    using Variant =
        std::variant<PointBridge, NormBridge, QuotientBridge, ScalingBridge, FunctionalBridge>;

    Variant variant;
    std::optional<double> uniform_bound; // analytic dist_s bound, when the construction has one

    // N evaluated on a pair of summand elements given by coefficients.
    double eval(const opsys::OperatorSystem& x_sys, const CVector& cx,
                const opsys::OperatorSystem& y_sys, const CVector& cy) const;
};

Bridge make_point_bridge(double gamma, const CVector& sigma0, const CVector& omega0,
                         double diam_x_upper, double diam_y_upper);
Bridge make_norm_bridge(double eps);
Bridge make_quotient_bridge(double eta, const CMatrix& phi, double defect_eps);
Bridge make_scaling_bridge(double lambda, double big_c);

} // namespace cqms::metrics
