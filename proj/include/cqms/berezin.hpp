// berezin.hpp — fuzzy-sphere approximation experiment: spin representations,
// coherent-state projections, covariant/contravariant symbols, rotation-action
// Lip-norms on functions and matrices, and the bridge-constant sweep

#pragma once

#include <functional>
#include <vector>

#include "cqms/matrix.hpp"
#include "cqms/metrics.hpp"
#include "cqms/rng.hpp"

namespace cqms::berezin {

struct SpinRep {
    double j = 0.5;
    Eigen::Index dim = 2;
    CMatrix jx, jy, jz;

    // zyz Euler angles: e^{-iα Jz} e^{-iβ Jy} e^{-iγ Jz}
    CMatrix rotation(double alpha, double beta, double gamma) const;

private:
    friend SpinRep make_spin(double j);
    CMatrix jy_vectors;  // cached eigenvectors of Jy
    RVector jy_values;
};

// j must be a half-integer ≥ 1/2.
SpinRep make_spin(double j);

// Rank-one projection onto the highest-weight vector.
CMatrix coherent_projection(const SpinRep& rep);

struct SphereGrid {
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> weight; // sums to 1

    std::size_t size() const { return theta.size(); }
};

// Product Gauss-Legendre (cos θ) × uniform (φ) quadrature.
SphereGrid make_grid(int n_theta = 24, int n_phi = 48);

// Function on the sphere: values on the grid plus an optional evaluator for
// off-grid points (exact rotation pullbacks when present).
struct SphereFunction {
    CVector values;
    std::function<Complex(double theta, double phi)> evaluator;

    bool has_evaluator() const { return static_cast<bool>(evaluator); }
};

double sup_norm(const SphereFunction& f);
double sup_distance(const SphereFunction& f, const SphereFunction& g);

// σ_T(x) = tr(T · U_x P U_x*), carried with an exact evaluator.
SphereFunction covariant_symbol(const CMatrix& t, const SpinRep& rep, const SphereGrid& grid);

// σ̆_f = (2j+1) Σ_i w_i f(x_i) U_i P U_i*.
CMatrix contravariant_symbol(const SphereFunction& f, const SpinRep& rep,
                             const SphereGrid& grid);

// ‖σ̆(σ_T) − T‖.
double berezin_residual(const CMatrix& t, const SpinRep& rep, const SphereGrid& grid);

struct Rotation {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double length = 0.0;       // rotation angle
    CMatrix unitary;           // on the representation space
    Eigen::Matrix3d so3;       // action on points
};

// The rotation angle of the zyz Euler triple.
double rotation_angle(double alpha, double beta, double gamma);

struct SphereLipPair {
    std::vector<Rotation> sample;

    // L_B(T) = max_g ‖U_g T U_g* − T‖ / ℓ(g)
    double lip_b(const CMatrix& t) const;
    // L_A(f) = max_g max_i |f(g⁻¹ x_i) − f(x_i)| / ℓ(g); needs an evaluator,
    // else falls back to nearest-grid lookup
    double lip_a(const SphereFunction& f, const SphereGrid& grid) const;
};

// Default rotation sample: z- and y-axis rotations at the given angles plus a
// few skew compositions. Throws on zero-length samples.
SphereLipPair sphere_lip_norms(const SpinRep& rep, const std::vector<double>& angles);

struct GammaEstimate {
    double gamma = 0.0;         // heuristic bridge constant
    double max_residual = 0.0;  // over the Lip-1 matrix net
    double upper_bound = 0.0;   // γ̂ + max residual
    metrics::MetricEstimate estimate; // kind = heuristic, with parameters
};

// Smallest sampled γ such that Lip-1 functions are matched by Lip-≤(1+δ)
// matrices within γ in sup norm (and conversely through T ↦ σ_T).
GammaEstimate bridge_gamma_estimate(const SpinRep& rep, const SphereGrid& grid,
                                    const SphereLipPair& lips, int samples, std::uint64_t seed);

// u.c.p. map C(S²) → M_n: weighted cell averages paired with a POVM.
struct GridPovm {
    std::vector<int> cell;        // grid point → cell index
    std::vector<CMatrix> effects; // one psd effect per cell, summing to 1
    CMatrix apply(const SphereFunction& f, const SphereGrid& grid) const;
};

GridPovm random_povm(const SphereGrid& grid, Eigen::Index n, std::uint64_t seed,
                     int atoms = 12);

} // namespace cqms::berezin
