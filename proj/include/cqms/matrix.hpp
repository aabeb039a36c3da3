// matrix.hpp — dense complex matrix primitives: norms, Hermitian eigendecomposition,
// Kronecker products, positivity checks

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "cqms/errors.hpp"

namespace cqms {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// All entries finite (no NaN/Inf).
bool is_finite(const CMatrix& a);

// Throws input_error if a has non-finite entries.
void require_finite(const CMatrix& a, const char* where);

// Largest singular value, accurate to ~1e-10 relative.
double operator_norm(const CMatrix& a);

// (a + a*)/2 and (a - a*)/(2i); a = re + i*im holds exactly.
CMatrix hermitian_part(const CMatrix& a);
CMatrix antihermitian_part(const CMatrix& a);

double hermiticity_defect(const CMatrix& a); // ‖a - a*‖

struct HermitianDecomposition {
    RVector eigenvalues; // ascending
    CMatrix eigenvectors; // unitary, columns

    CMatrix reconstruct() const;
};

// Eigendecomposition of a Hermitian matrix. Requires ‖a - a*‖ ≤ 1e-10·(1+‖a‖).
HermitianDecomposition eigh(const CMatrix& a);

// Kronecker product, entry ((i·p+k),(j·q+l)) = a(i,j)·b(k,l).
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Uniform spectral tolerance for positivity: a is accepted as psd iff
// min eigenvalue ≥ -psd_tolerance(a).
double psd_tolerance(const CMatrix& a);
bool is_psd(const CMatrix& a);
double min_eigenvalue(const CMatrix& a); // of the Hermitian part

// Frobenius real inner product Re tr(a* b).
double fro_inner(const CMatrix& a, const CMatrix& b);

// Matrix square root of a psd matrix (spectral, clipping tiny negatives).
CMatrix psd_sqrt(const CMatrix& a);
// Inverse square root; eigenvalues below floor_eig are rejected via input_error.
CMatrix psd_inv_sqrt(const CMatrix& a, double floor_eig = 1e-12);

// vec(a) column-major stacking and its inverse.
CVector vec(const CMatrix& a);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

} // namespace cqms
