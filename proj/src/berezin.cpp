#include "cqms/berezin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cqms::berezin {

namespace {
constexpr double pi = std::numbers::pi;
}

CMatrix SpinRep::rotation(double alpha, double beta, double gamma) const {
    CVector za(dim), zg(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double m = j - static_cast<double>(i);
        za(i) = std::polar(1.0, -alpha * m);
        zg(i) = std::polar(1.0, -gamma * m);
    }
    CVector eb(dim);
    for (Eigen::Index i = 0; i < dim; ++i) eb(i) = std::polar(1.0, -beta * jy_values(i));
    CMatrix rot_y = jy_vectors * eb.asDiagonal() * jy_vectors.adjoint();
    return za.asDiagonal() * rot_y * zg.asDiagonal();
}

SpinRep make_spin(double j) {
    const double twoj = 2.0 * j;
    if (j < 0.5 - 1e-12 || std::abs(twoj - std::round(twoj)) > 1e-12) {
        throw input_error("make_spin: j must be a half-integer ≥ 1/2");
    }
    SpinRep rep;
    rep.j = j;
    rep.dim = static_cast<Eigen::Index>(std::lround(twoj)) + 1;
    const Eigen::Index d = rep.dim;

    rep.jz = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) rep.jz(i, i) = j - static_cast<double>(i);

    CMatrix jplus = CMatrix::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) {
        const double m = j - static_cast<double>(i); // J+ |j,m⟩ = c |j,m+1⟩
        jplus(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    rep.jx = 0.5 * (jplus + jplus.adjoint());
    rep.jy = (jplus - jplus.adjoint()) / Complex(0.0, 2.0);

    auto dec = eigh(rep.jy);
    rep.jy_vectors = dec.eigenvectors;
    rep.jy_values = dec.eigenvalues;
    return rep;
}

CMatrix coherent_projection(const SpinRep& rep) {
    CVector e0 = CVector::Zero(rep.dim);
    e0(0) = 1.0; // highest weight m = j
    return e0 * e0.adjoint();
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
}

} // namespace

SphereGrid make_grid(int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 2) throw input_error("make_grid: grid too small");
    std::vector<double> nodes, weights;
    gauss_legendre(n_theta, nodes, weights);
    SphereGrid g;
    g.theta.reserve(n_theta * n_phi);
    for (int i = 0; i < n_theta; ++i) {
        const double th = std::acos(nodes[i]);
        for (int p = 0; p < n_phi; ++p) {
            g.theta.push_back(th);
            g.phi.push_back(2.0 * pi * p / n_phi);
            g.weight.push_back(weights[i] / 2.0 / n_phi); // ∫dμ = 1
        }
    }
    return g;
}

double sup_norm(const SphereFunction& f) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) m = std::max(m, std::abs(f.values(i)));
    return m;
}

double sup_distance(const SphereFunction& f, const SphereFunction& g) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        m = std::max(m, std::abs(f.values(i) - g.values(i)));
    }
    return m;
}

SphereFunction covariant_symbol(const CMatrix& t, const SpinRep& rep, const SphereGrid& grid) {
    if (t.rows() != rep.dim || t.cols() != rep.dim) {
        throw input_error("covariant_symbol: matrix size mismatch");
    }
    SphereFunction f;
    f.values.resize(grid.size());
    const CMatrix tc = t;
    const SpinRep r = rep;
    f.evaluator = [tc, r](double theta, double phi) {
        CVector eta = CVector::Zero(r.dim);
        eta(0) = 1.0;
        eta = r.rotation(phi, theta, 0.0) * eta;
        return (eta.adjoint() * tc * eta)(0);
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        f.values(i) = f.evaluator(grid.theta[i], grid.phi[i]);
    }
    return f;
}

CMatrix contravariant_symbol(const SphereFunction& f, const SpinRep& rep,
                             const SphereGrid& grid) {
    if (static_cast<std::size_t>(f.values.size()) != grid.size()) {
        throw input_error("contravariant_symbol: grid mismatch");
    }
    CMatrix out = CMatrix::Zero(rep.dim, rep.dim);
    CVector e0 = CVector::Zero(rep.dim);
    e0(0) = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const CVector eta = rep.rotation(grid.phi[i], grid.theta[i], 0.0) * e0;
        out += (rep.dim * grid.weight[i] * f.values(i)) * (eta * eta.adjoint());
    }
    return out;
}

double berezin_residual(const CMatrix& t, const SpinRep& rep, const SphereGrid& grid) {
    return operator_norm(CMatrix(contravariant_symbol(covariant_symbol(t, rep, grid), rep, grid)
                                 - t));
}

double rotation_angle(double alpha, double beta, double gamma) {
    const double c = std::cos(beta / 2.0) * std::cos((alpha + gamma) / 2.0);
    return 2.0 * std::acos(std::clamp(std::abs(c), 0.0, 1.0));
}

namespace {

Eigen::Matrix3d so3_z(double a) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 0) = std::cos(a);
    m(0, 1) = -std::sin(a);
    m(1, 0) = std::sin(a);
    m(1, 1) = std::cos(a);
    return m;
}

Eigen::Matrix3d so3_y(double b) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 0) = std::cos(b);
    m(0, 2) = std::sin(b);
    m(2, 0) = -std::sin(b);
    m(2, 2) = std::cos(b);
    return m;
}

Eigen::Vector3d point_of(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::pair<double, double> angles_of(const Eigen::Vector3d& v) {
    const double theta = std::acos(std::clamp(v(2), -1.0, 1.0));
    double phi = std::atan2(v(1), v(0));
    if (phi < 0) phi += 2.0 * pi;
    return {theta, phi};
}

} // namespace

double SphereLipPair::lip_b(const CMatrix& t) const {
    double best = 0.0;
    for (const Rotation& g : sample) {
        best = std::max(best, operator_norm(CMatrix(g.unitary * t * g.unitary.adjoint() - t)) /
                                  g.length);
    }
    return best;
}

double SphereLipPair::lip_a(const SphereFunction& f, const SphereGrid& grid) const {
    double best = 0.0;
    for (const Rotation& g : sample) {
        const Eigen::Matrix3d rinv = g.so3.transpose();
        double diff = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto [th, ph] = angles_of(rinv * point_of(grid.theta[i], grid.phi[i]));
            Complex moved;
            if (f.has_evaluator()) {
                moved = f.evaluator(th, ph);
            } else {
                // nearest grid point (coarse; documented fallback)
                double bestd = 1e9;
                std::size_t arg = 0;
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const double dd =
                        (point_of(grid.theta[k], grid.phi[k]) - point_of(th, ph)).squaredNorm();
                    if (dd < bestd) {
                        bestd = dd;
                        arg = k;
                    }
                }
                moved = f.values(arg);
            }
            diff = std::max(diff, std::abs(moved - f.values(i)));
        }
        best = std::max(best, diff / g.length);
    }
    return best;
}

SphereLipPair sphere_lip_norms(const SpinRep& rep, const std::vector<double>& angles) {
    SphereLipPair pair;
    auto add = [&](double a, double b, double c) {
        const double len = rotation_angle(a, b, c);
        if (len <= 1e-12) throw input_error("sphere_lip_norms: zero-length rotation in sample");
        Rotation r;
        r.alpha = a;
        r.beta = b;
        r.gamma = c;
        r.length = len;
        r.unitary = rep.rotation(a, b, c);
        r.so3 = so3_z(a) * so3_y(b) * so3_z(c);
        pair.sample.push_back(std::move(r));
    };
    for (double t : angles) {
        add(t, 0.0, 0.0);
        add(0.0, t, 0.0);
        add(t / 2.0, t, t / 3.0);
    }
    return pair;
}

GammaEstimate bridge_gamma_estimate(const SpinRep& rep, const SphereGrid& grid,
                                    const SphereLipPair& lips, int samples, std::uint64_t seed) {
    Rng rng(mix_seed(seed, "gamma"));
    GammaEstimate out;

    // Lip-1 matrix net: random Hermitians scaled so L_B = 1, plus J_z/‖·‖
    std::vector<CMatrix> net;
    {
        CMatrix t = rep.jz;
        const double l = lips.lip_b(t);
        if (l > 1e-12) net.push_back(t / l);
    }
    for (int s = 0; s < samples; ++s) {
        CMatrix t = rng.hermitian(rep.dim);
        const double l = lips.lip_b(t);
        if (l > 1e-12) net.push_back(t / l);
    }

    // A → B direction: match each Lip-1 function by its contravariant symbol
    const double delta = 0.05;
    for (const CMatrix& t : net) {
        SphereFunction f = covariant_symbol(t, rep, grid); // L_A(f) ≤ L_B(t) = 1
        CMatrix cand = contravariant_symbol(f, rep, grid);
        const double lb = lips.lip_b(cand);
        if (lb > 1.0 + delta) cand *= (1.0 + delta) / lb;
        const double gap = sup_distance(f, covariant_symbol(cand, rep, grid));
        out.gamma = std::max(out.gamma, gap);
        out.max_residual = std::max(out.max_residual, berezin_residual(t, rep, grid));
    }
    // B → A direction: T ↦ σ_T matches exactly, contributing zero

    out.upper_bound = out.gamma + out.max_residual;
    out.estimate.value = out.upper_bound;
    out.estimate.kind = metrics::MetricEstimate::Kind::heuristic;
    out.estimate.seed = seed;
    out.estimate.params["gamma"] = out.gamma;
    out.estimate.params["max_residual"] = out.max_residual;
    out.estimate.params["net_size"] = static_cast<double>(net.size());
    return out;
}

CMatrix GridPovm::apply(const SphereFunction& f, const SphereGrid& grid) const {
    const Eigen::Index n = effects[0].rows();
    std::vector<Complex> avg(effects.size(), 0.0);
    std::vector<double> wsum(effects.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        avg[cell[i]] += grid.weight[i] * f.values(i);
        wsum[cell[i]] += grid.weight[i];
    }
    CMatrix out = CMatrix::Zero(n, n);
    for (std::size_t c = 0; c < effects.size(); ++c) {
        if (wsum[c] > 0.0) out += (avg[c] / wsum[c]) * effects[c];
    }
    return out;
}

GridPovm random_povm(const SphereGrid& grid, Eigen::Index n, std::uint64_t seed, int atoms) {
    Rng rng(mix_seed(seed, "povm"));
    GridPovm povm;
    povm.cell.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        povm.cell[i] = static_cast<int>(rng.integer(atoms));
    }
    std::vector<CMatrix> raw;
    CMatrix total = CMatrix::Zero(n, n);
    for (int c = 0; c < atoms; ++c) {
        CMatrix g = rng.ginibre(n, n);
        raw.push_back(g * g.adjoint());
        total += raw.back();
    }
    const CMatrix r = psd_inv_sqrt(hermitian_part(total), 1e-12);
    povm.effects.reserve(atoms);
    for (int c = 0; c < atoms; ++c) povm.effects.push_back(r * raw[c] * r);
    return povm;
}

} // namespace cqms::berezin
