#include "cqms/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace cqms {

bool is_finite(const CMatrix& a) {
    return a.allFinite();
}

void require_finite(const CMatrix& a, const char* where) {
    if (!a.allFinite()) {
        throw input_error(std::string(where) + ": non-finite matrix entries");
    }
}

double operator_norm(const CMatrix& a) {
    require_finite(a, "operator_norm");
    if (a.size() == 0) return 0.0;
    // Hermitian inputs get the cheaper, more accurate spectral route.
    if (a.rows() == a.cols() && (a - a.adjoint()).norm() <= 1e-12 * (1.0 + a.norm())) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

CMatrix hermitian_part(const CMatrix& a) {
    return 0.5 * (a + a.adjoint());
}

CMatrix antihermitian_part(const CMatrix& a) {
    return (a - a.adjoint()) / Complex(0.0, 2.0);
}

double hermiticity_defect(const CMatrix& a) {
    if (a.rows() != a.cols()) throw input_error("hermiticity_defect: matrix not square");
    // i(a − a*) is Hermitian, so ‖a − a*‖ comes from a spectral decomposition
    CMatrix h = Complex(0.0, 1.0) * (a - a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

CMatrix HermitianDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
}

HermitianDecomposition eigh(const CMatrix& a) {
    require_finite(a, "eigh");
    if (a.rows() != a.cols()) throw input_error("eigh: matrix not square");
    const double defect = operator_norm(CMatrix(a - a.adjoint()));
    if (defect > 1e-10 * (1.0 + operator_norm(a))) {
        throw input_error("eigh: input not Hermitian within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
    if (es.info() != Eigen::Success) {
        throw numerical_error("eigh: eigensolver failed");
    }
    return HermitianDecomposition{es.eigenvalues(), es.eigenvectors()};
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    require_finite(a, "kron");
    require_finite(b, "kron");
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double psd_tolerance(const CMatrix& a) {
    return 1e-9 * (1.0 + operator_norm(a));
}

double min_eigenvalue(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool is_psd(const CMatrix& a) {
    if (a.rows() != a.cols()) return false;
    if (hermiticity_defect(a) > 1e-8 * (1.0 + a.norm())) return false;
    return min_eigenvalue(a) >= -psd_tolerance(a);
}

double fro_inner(const CMatrix& a, const CMatrix& b) {
    return (a.adjoint() * b).trace().real();
}

CMatrix psd_sqrt(const CMatrix& a) {
    auto d = eigh(a);
    RVector vals = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return d.eigenvectors * vals.asDiagonal() * d.eigenvectors.adjoint();
}

CMatrix psd_inv_sqrt(const CMatrix& a, double floor_eig) {
    auto d = eigh(a);
    if (d.eigenvalues(0) < floor_eig) {
        throw input_error("psd_inv_sqrt: matrix is singular at the requested floor");
    }
    RVector vals = d.eigenvalues.cwiseSqrt().cwiseInverse();
    return d.eigenvectors * vals.asDiagonal() * d.eigenvectors.adjoint();
}

CVector vec(const CMatrix& a) {
    return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw input_error("unvec: size mismatch");
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

} // namespace cqms
