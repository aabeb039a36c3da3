#include "cqms/bridge.hpp"

#include <cmath>

namespace cqms::metrics {

namespace {

Complex dot_values(const CVector& values, const CVector& coeff) {
    return (values.transpose() * coeff)(0);
}

} // namespace

double Bridge::eval(const opsys::OperatorSystem& x_sys, const CVector& cx,
                    const opsys::OperatorSystem& y_sys, const CVector& cy) const {
    if (const auto* p = std::get_if<PointBridge>(&variant)) {
        return std::abs(dot_values(p->sigma0, cx) - dot_values(p->omega0, cy)) / p->gamma;
    }
    if (const auto* nb = std::get_if<NormBridge>(&variant)) {
        if (x_sys.ambient_dim() != y_sys.ambient_dim()) {
            throw input_error("NormBridge: summands must share an ambient algebra");
        }
        return operator_norm(CMatrix(x_sys.to_matrix(cx) - y_sys.to_matrix(cy))) / nb->eps;
    }
    if (const auto* qb = std::get_if<QuotientBridge>(&variant)) {
        return operator_norm(CMatrix(y_sys.to_matrix(qb->phi * cx) - y_sys.to_matrix(cy))) /
               qb->eta;
    }
    if (const auto* sb = std::get_if<ScalingBridge>(&variant)) {
        if (y_sys.dim() != 1) throw input_error("ScalingBridge: right summand must be C");
        const Complex mu = cy(0);
        const Eigen::Index k = x_sys.ambient_dim();
        return sb->lambda / sb->big_c *
               operator_norm(CMatrix(x_sys.to_matrix(cx) - mu * CMatrix::Identity(k, k)));
    }
    const auto& fb = std::get<FunctionalBridge>(variant);
    double best = 0.0;
    for (std::size_t i = 0; i < fb.x_maps.size(); ++i) {
        CMatrix m = CMatrix::Zero(fb.x_maps[i][0].rows(), fb.x_maps[i][0].cols());
        for (Eigen::Index l = 0; l < cx.size(); ++l) m += cx(l) * fb.x_maps[i][l];
        for (Eigen::Index l = 0; l < cy.size(); ++l) m += cy(l) * fb.y_maps[i][l];
        best = std::max(best, operator_norm(m));
    }
    return best;
}

Bridge make_point_bridge(double gamma, const CVector& sigma0, const CVector& omega0,
                         double diam_x_upper, double diam_y_upper) {
    if (gamma <= 0.0) throw input_error("make_point_bridge: gamma must be positive");
    Bridge b;
    b.variant = PointBridge{gamma, sigma0, omega0};
    b.uniform_bound = diam_x_upper + diam_y_upper + gamma;
    return b;
}

Bridge make_norm_bridge(double eps) {
    if (eps <= 0.0) throw input_error("make_norm_bridge: eps must be positive");
    Bridge b;
    b.variant = NormBridge{eps};
    b.uniform_bound = eps;
    return b;
}

Bridge make_quotient_bridge(double eta, const CMatrix& phi, double defect_eps) {
    if (eta <= 0.0) throw input_error("make_quotient_bridge: eta must be positive");
    if (defect_eps < 0.0) throw input_error("make_quotient_bridge: defect must be nonnegative");
    Bridge b;
    b.variant = QuotientBridge{eta, phi, defect_eps};
    b.uniform_bound = defect_eps + eta;
    return b;
}

Bridge make_scaling_bridge(double lambda, double big_c) {
    if (lambda <= 0.0 || big_c <= 0.0) {
        throw input_error("make_scaling_bridge: parameters must be positive");
    }
    Bridge b;
    b.variant = ScalingBridge{lambda, big_c};
    b.uniform_bound = big_c / lambda;
    return b;
}

} // namespace cqms::metrics
