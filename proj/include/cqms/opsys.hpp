// opsys.hpp — operator systems as unital adjoint-closed subspaces of matrix
// algebras; matrix states, UCP/SCP maps, and the c.p.-map ↔ positive-functional
// correspondence

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cqms/matrix.hpp"
#include "cqms/rng.hpp"

namespace cqms::opsys {

// Unital adjoint-closed linear subspace of M_k, given by a basis whose first
// element is the identity. Immutable after construction; derived structure
// (coefficient solver, self-adjoint basis) is precomputed.
class OperatorSystem {
public:
    explicit OperatorSystem(std::vector<CMatrix> basis);

    Eigen::Index ambient_dim() const { return ambient_dim_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    Eigen::Index hermitian_dim() const { return static_cast<Eigen::Index>(sa_basis_.size()); }

    const CMatrix& basis(std::size_t l) const { return basis_[l]; }
    const std::vector<CMatrix>& basis() const { return basis_; }

    CMatrix to_matrix(const CVector& coeff) const;
    // Coefficients of x in the basis; throws input_error if x is not in the
    // span within tol (relative to ‖x‖).
    CVector coefficients(const CMatrix& x, double tol = 1e-8) const;
    bool contains(const CMatrix& x, double tol = 1e-8) const;

    // Real-orthonormal (Frobenius) basis of the self-adjoint part; element 0
    // is a positive multiple of the identity.
    const std::vector<CMatrix>& sa_basis() const { return sa_basis_; }
    // Complex-basis coefficient vectors of the sa basis elements.
    const std::vector<CVector>& sa_basis_coeffs() const { return sa_basis_coeffs_; }
    CMatrix sa_element(const RVector& coords) const;
    RVector sa_coords(const CMatrix& h, double tol = 1e-8) const;

    // Coefficient vector of the adjoint: coeff(x*) = adjoint_map * conj(coeff(x)).
    const CMatrix& adjoint_map() const { return adjoint_map_; }

    bool same_as(const OperatorSystem& other, double tol = 1e-10) const;

private:
    Eigen::Index ambient_dim_;
    std::vector<CMatrix> basis_;
    std::vector<CMatrix> sa_basis_;
    std::vector<CVector> sa_basis_coeffs_;
    CMatrix basis_vecs_;   // k² × m, column l = vec(basis_[l])
    Eigen::CompleteOrthogonalDecomposition<CMatrix> coeff_solver_;
    CMatrix adjoint_map_;  // m × m
};

using SystemPtr = std::shared_ptr<const OperatorSystem>;

// Full matrix algebra M_k as an operator system (basis: identity first).
SystemPtr full_matrix_system(Eigen::Index k);
// Diagonal matrices in M_k.
SystemPtr diagonal_system(Eigen::Index k);
// The "one-point" system C.
SystemPtr scalar_system();

// X ⊕ Y embedded block-diagonally in M_{k_X + k_Y}, with coefficient
// conversions between the summands and the sum.
struct DirectSum {
    SystemPtr sum;
    SystemPtr x_sys;
    SystemPtr y_sys;
    CMatrix embed;     // m_sum × (m_X + m_Y): coeff_sum from stacked (coeff_x; coeff_y)
    CMatrix project_x; // m_X × m_sum
    CMatrix project_y; // m_Y × m_sum

    CVector pair_to_sum(const CVector& cx, const CVector& cy) const;
    CVector sum_to_x(const CVector& cs) const { return project_x * cs; }
    CVector sum_to_y(const CVector& cs) const { return project_y * cs; }
};

DirectSum direct_sum(SystemPtr x_sys, SystemPtr y_sys);

// Element of M_n ⊗ X stored entrywise by coefficients.
struct BlockElement {
    Eigen::Index n = 1;
    std::vector<CVector> entries; // row-major, n*n coefficient vectors

    const CVector& entry(Eigen::Index i, Eigen::Index j) const { return entries[i * n + j]; }
    CVector& entry(Eigen::Index i, Eigen::Index j) { return entries[i * n + j]; }

    CMatrix to_matrix(const OperatorSystem& sys) const; // (n·k)×(n·k)
    BlockElement adjoint(const OperatorSystem& sys) const;
    bool is_hermitian(const OperatorSystem& sys, double tol = 1e-9) const;
};

// Completely positive map X → M_n stored by images of basis elements.
struct CpMap {
    SystemPtr system;
    Eigen::Index n = 1;
    std::vector<CMatrix> images;

    CMatrix apply(const CVector& coeff) const;
    CMatrix apply_matrix(const CMatrix& x) const; // x ∈ span, solves coefficients
    CMatrix unit_image() const { return images[0]; }
};

struct UcpMap : CpMap {};
struct ScpMap : CpMap {};

// Positive linear functional on M_n ⊗ X; table(i*n+j, l) = σ(e_ij ⊗ b_l).
struct MatrixState {
    SystemPtr system;
    Eigen::Index n = 1;
    CMatrix table; // (n²) × m

    Complex value(Eigen::Index i, Eigen::Index j, Eigen::Index l) const {
        return table(i * n + j, l);
    }
    Complex apply(const BlockElement& x) const;
    Complex apply_unit() const; // σ(1 ⊗ 1)
};

// σ_φ((x_ij)) = (1/n) Σ φ(x_ij)_ij.
MatrixState state_of_map(const CpMap& phi);

// (φ_σ(x))_ij = n σ(e_ij ⊗ x). Throws input_error unless σ passes is_state.
ScpMap map_of_state(const MatrixState& sigma, Rng rng_for_check, int check_samples = 32);
// Same construction without the state check (for internal round trips).
ScpMap map_of_state_unchecked(const MatrixState& sigma);

// Restriction of z ↦ tr(rho·z) on M_{n·k} to M_n ⊗ X.
MatrixState restrict_density(const CMatrix& rho, Eigen::Index n, SystemPtr system);

// σ(x)·1_{M_n} for a state σ given by its values on the basis.
UcpMap scalar_embedding(SystemPtr system, const CVector& state_values, Eigen::Index n);

// V* x V for an isometry V : C^n → C^k.
UcpMap compression(SystemPtr system, const CMatrix& isometry);

// Values on the basis of the normalized-trace state.
CVector tracial_state_values(const OperatorSystem& sys);

// Haar-like random UCP map: random ambient density, restrict, Choi transform,
// unitalize by conjugation with φ(1)^{-1/2} (convex perturbation toward a
// scalar embedding when φ(1) is nearly singular).
UcpMap random_ucp(SystemPtr system, Eigen::Index n, std::uint64_t seed);

struct StateCheck {
    bool ok = true;
    double unit_defect = 0.0;
    double worst_positivity = 0.0; // most negative sampled σ(psd)
    double worst_reality = 0.0;    // largest |Im σ(h)| over sampled Hermitians
    std::string detail;
};

StateCheck is_state(const MatrixState& sigma, Rng rng, int samples = 32);

struct MapCheck {
    bool ok = true;
    double unit_defect = 0.0;        // ‖φ(1) − 1‖ for UCP; |tr φ(1)/n − 1| for SCP
    double positivity_defect = 0.0;  // from the associated functional
    double scp_norm_bound = 0.0;     // ‖φ(1)‖, must be ≤ n³
    std::string detail;
};

MapCheck validate_ucp(const UcpMap& phi, Rng rng, int samples = 32);
MapCheck validate_scp(const ScpMap& phi, Rng rng, int samples = 32);

struct AmbientExtension {
    UcpMap extension;         // defined on full_matrix_system(k)
    double restriction_error; // max over basis of ‖Φ(b_l) − φ(b_l)‖
    bool ok = false;          // restriction_error ≤ tolerance
};

// Numerical u.c.p. extension of φ to all of M_k via alternating projections
// on the Choi matrix (psd ∩ {unital, restricts to φ}).
AmbientExtension extend_to_ambient(const UcpMap& phi, double tolerance = 1e-7,
                                   int max_iterations = 20000);

} // namespace cqms::opsys
