// nctorus.hpp — rational noncommutative tori as clock-shift matrix models:
// gauge-action Lip-norms, Fourier coefficients and Cesàro means, the Fejér
// kernel bound, and constructive finite-approximation certificates

#pragma once

#include <functional>
#include <map>
#include <vector>

#include "cqms/lipnorm.hpp"
#include "cqms/opsys.hpp"

namespace cqms::nctorus {

// Multi-index of exponents; canonical entries lie in [0, q).
using Exponents = std::vector<int>;

struct TorusSpec {
    int d = 2;
    int q = 1;
    Eigen::MatrixXi p;                // antisymmetric integer phase matrix mod q
    Eigen::Index model_dim = 1;       // clock-shift representation size
    std::vector<CMatrix> generators;  // u_1 .. u_d
    opsys::SystemPtr system;          // span of the q^d monomials, identity first
    int degree_cap = 0;               // signed degree with exact Fourier round trips

    // canonical monomial index ↔ flat basis index (row-major over [0,q)^d)
    Eigen::Index monomial_index(const Exponents& canonical) const;
    Exponents canonical_of(Eigen::Index flat) const;
    static int signed_rep(int k, int q);

    // u_1^{k_1} ··· u_d^{k_d} for arbitrary integer exponents
    CMatrix monomial(const Exponents& k) const;
};

// Builds the finite-dimensional model. For d = 2 with gcd(p_{01}, q) = 1 the
// irreducible q-dimensional clock/shift pair is used; pairwise-block phase
// matrices factor through tensor products; anything else falls back to the
// twisted regular representation on (C^q)^{⊗d} (dimension q^d ≤ 64).
TorusSpec clock_shift_algebra(int d, int q, const Eigen::MatrixXi& p);

// e^{2πi p/q} from a real phase; throws unless the phase is within tol of a
// rational with the given denominator.
int rationalize_phase(double phase_fraction, int q, double tol = 1e-9);

// Gauge automorphism at t ∈ T^d acting on coefficients by signed-exponent
// phases; exact on the monomial span for every t.
lip::Automorphism torus_action(const TorusSpec& spec, const std::vector<double>& t);

// Length function on T^d = (R/Z)^d.
struct LengthFn {
    std::function<double(const std::vector<double>&)> eval;
};

LengthFn euclidean_length(int d);

struct LengthCheck {
    bool ok = true;
    double worst_subadditivity = 0.0;
    std::string detail;
};
LengthCheck validate_length(const LengthFn& len, int d, Rng rng, int samples = 128);

// Sampled gauge-action Lip-norm: axis points j/m for j = 1..m−1 on each axis
// plus a golden-ratio lattice; lengths from the supplied length function.
lip::LipNormPtr torus_lip_norm(const TorusSpec& spec, const LengthFn& len, int axis_points = 32,
                               int lattice_points = 8);

struct FourierPolynomial {
    int d = 2;
    std::map<Exponents, Complex> coeff; // signed exponents

    FourierPolynomial& add(const Exponents& k, Complex c);
};

Complex fourier_coeff(const TorusSpec& spec, const CMatrix& a, const Exponents& k);
FourierPolynomial fourier_expand(const TorusSpec& spec, const CMatrix& a);
CMatrix to_matrix(const TorusSpec& spec, const FourierPolynomial& poly);

FourierPolynomial cesaro_mean(const FourierPolynomial& a, int n);
CMatrix cesaro_mean(const TorusSpec& spec, const CMatrix& a, int n);
// Coefficient map of σ_n on the model's monomial basis.
CMatrix cesaro_coefficient_map(const TorusSpec& spec, int n);

// Fejér kernel on [0,1): (n+1)⁻¹ (sin((n+1)πt)/sin(πt))², with K_n(0) = n+1.
double fejer_kernel(int n, double t);

// Σ_{k=1}^d ∫ ℓ(r_k(t)) K_n(t) dt by trapezoid quadrature (≥ 2^12 points).
double fejer_bound(int n, int d, const LengthFn& len, int quadrature_points = 4096);

struct CpaCertificate {
    bool ok = false;
    Eigen::Index rank = 0;          // C*-algebra rank of B
    int cesaro_degree = -1;         // −1 for the rank-one certificate
    double achieved_defect = 0.0;   // sup over the checked net of ‖βα(x) − x‖
    double target_eps = 0.0;
    std::string detail;
    CMatrix alpha_map;              // coefficient action of α on the model
    std::vector<Eigen::Index> b_basis; // flat monomial indices spanning B's carrier
};

struct RcpOptions {
    int net_samples = 64;
    std::uint64_t seed = 1;
    double slack = 1e-6;
};

// Constructive upper bound for the smallest rank of an ε-approximating
// u.c.p. factorization through a finite-dimensional C*-algebra.
CpaCertificate rcp_upper(const TorusSpec& spec, const lip::LipNormPtr& lip, double eps,
                         const RcpOptions& opts = {});

// Re-checks a certificate's defect on a freshly seeded Lip-ball net.
double recheck_defect(const TorusSpec& spec, const lip::LipNormPtr& lip,
                      const CpaCertificate& cert, int samples, std::uint64_t seed);

struct AfnResult {
    CpaCertificate cpa;
    Eigen::Index rank = 0;            // ≤ the Rcp rank
    opsys::SystemPtr quotient_system; // Y = α(X)
    lip::LipNormPtr quotient_lip;     // L_Y induced via α
};

AfnResult afn_upper(const TorusSpec& spec, const lip::LipNormPtr& lip, double eps,
                    const RcpOptions& opts = {});

// Rank of the C*-algebra generated by the monomials, from its central
// characters (Σ n_i over the block decomposition ⊕ M_{n_i}).
Eigen::Index algebra_rank(const TorusSpec& spec);

} // namespace cqms::nctorus
