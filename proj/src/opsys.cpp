#include "cqms/opsys.hpp"

#include <algorithm>
#include <cmath>

namespace cqms::opsys {

namespace {

// Orthonormalize Hermitian candidates under the Frobenius real inner product.
std::vector<CMatrix> gram_schmidt_hermitian(const std::vector<CMatrix>& candidates,
                                            double drop_tol) {
    std::vector<CMatrix> out;
    for (const CMatrix& c : candidates) {
        CMatrix v = c;
        for (const CMatrix& u : out) v -= fro_inner(u, v) * u;
        // a second pass stabilizes near-dependent candidates
        for (const CMatrix& u : out) v -= fro_inner(u, v) * u;
        const double nrm = std::sqrt(fro_inner(v, v));
        if (nrm > drop_tol) out.push_back(v / nrm);
    }
    return out;
}

} // namespace

OperatorSystem::OperatorSystem(std::vector<CMatrix> basis) : basis_(std::move(basis)) {
    if (basis_.empty()) throw input_error("OperatorSystem: empty basis");
    ambient_dim_ = basis_[0].rows();
    if (ambient_dim_ <= 0) throw input_error("OperatorSystem: ambient dimension must be positive");
    for (const CMatrix& b : basis_) {
        require_finite(b, "OperatorSystem");
        if (b.rows() != ambient_dim_ || b.cols() != ambient_dim_) {
            throw input_error("OperatorSystem: basis matrices must be square of equal size");
        }
    }
    const CMatrix eye = CMatrix::Identity(ambient_dim_, ambient_dim_);
    if (operator_norm(CMatrix(basis_[0] - eye)) > 1e-12) {
        throw input_error("OperatorSystem: basis[0] must be the identity");
    }

    const Eigen::Index m = dim();
    basis_vecs_.resize(ambient_dim_ * ambient_dim_, m);
    for (Eigen::Index l = 0; l < m; ++l) basis_vecs_.col(l) = vec(basis_[l]);

    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(basis_vecs_);
    if (cod.rank() < m) throw input_error("OperatorSystem: basis is linearly dependent");
    coeff_solver_ = std::move(cod);

    adjoint_map_.resize(m, m);
    for (Eigen::Index l = 0; l < m; ++l) {
        const CMatrix adj = basis_[l].adjoint();
        CVector c = coeff_solver_.solve(vec(adj));
        const double resid = (basis_vecs_ * c - vec(adj)).norm();
        if (resid > 1e-10 * (1.0 + adj.norm())) {
            throw input_error("OperatorSystem: span is not closed under adjoints");
        }
        adjoint_map_.col(l) = c;
    }

    std::vector<CMatrix> cand;
    cand.push_back(eye / std::sqrt(static_cast<double>(ambient_dim_)));
    for (const CMatrix& b : basis_) {
        cand.push_back(hermitian_part(b));
        cand.push_back(antihermitian_part(b));
    }
    sa_basis_ = gram_schmidt_hermitian(cand, 1e-9);
    sa_basis_coeffs_.reserve(sa_basis_.size());
    for (const CMatrix& h : sa_basis_) sa_basis_coeffs_.push_back(coefficients(h, 1e-7));
}

CMatrix OperatorSystem::to_matrix(const CVector& coeff) const {
    if (coeff.size() != dim()) throw input_error("to_matrix: coefficient size mismatch");
    return unvec(basis_vecs_ * coeff, ambient_dim_, ambient_dim_);
}

CVector OperatorSystem::coefficients(const CMatrix& x, double tol) const {
    require_finite(x, "coefficients");
    if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_) {
        throw input_error("coefficients: ambient dimension mismatch");
    }
    CVector c = coeff_solver_.solve(vec(x));
    const double resid = (basis_vecs_ * c - vec(x)).norm();
    if (resid > tol * (1.0 + x.norm())) {
        throw input_error("coefficients: element lies outside the system span");
    }
    return c;
}

bool OperatorSystem::contains(const CMatrix& x, double tol) const {
    if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_) return false;
    CVector c = coeff_solver_.solve(vec(x));
    return (basis_vecs_ * c - vec(x)).norm() <= tol * (1.0 + x.norm());
}

CMatrix OperatorSystem::sa_element(const RVector& coords) const {
    if (coords.size() != hermitian_dim()) throw input_error("sa_element: size mismatch");
    CMatrix out = CMatrix::Zero(ambient_dim_, ambient_dim_);
    for (Eigen::Index i = 0; i < coords.size(); ++i) out += coords(i) * sa_basis_[i];
    return out;
}

RVector OperatorSystem::sa_coords(const CMatrix& h, double tol) const {
    RVector coords(hermitian_dim());
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords(i) = fro_inner(sa_basis_[i], h);
    CMatrix rec = sa_element(coords);
    if (operator_norm(CMatrix(rec - h)) > tol * (1.0 + operator_norm(h))) {
        throw input_error("sa_coords: element is not in the self-adjoint part of the span");
    }
    return coords;
}

bool OperatorSystem::same_as(const OperatorSystem& other, double tol) const {
    if (ambient_dim_ != other.ambient_dim_ || dim() != other.dim()) return false;
    for (Eigen::Index l = 0; l < dim(); ++l) {
        if (operator_norm(CMatrix(basis_[l] - other.basis_[l])) > tol) return false;
    }
    return true;
}

SystemPtr full_matrix_system(Eigen::Index k) {
    std::vector<CMatrix> basis;
    basis.push_back(CMatrix::Identity(k, k));
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            if (a == 0 && b == 0) continue;
            CMatrix e = CMatrix::Zero(k, k);
            e(a, b) = 1.0;
            basis.push_back(e);
        }
    }
    return std::make_shared<OperatorSystem>(std::move(basis));
}

SystemPtr diagonal_system(Eigen::Index k) {
    std::vector<CMatrix> basis;
    basis.push_back(CMatrix::Identity(k, k));
    for (Eigen::Index a = 1; a < k; ++a) {
        CMatrix e = CMatrix::Zero(k, k);
        e(a, a) = 1.0;
        basis.push_back(e);
    }
    return std::make_shared<OperatorSystem>(std::move(basis));
}

SystemPtr scalar_system() { return full_matrix_system(1); }

CVector DirectSum::pair_to_sum(const CVector& cx, const CVector& cy) const {
    CVector stacked(cx.size() + cy.size());
    stacked << cx, cy;
    return embed * stacked;
}

DirectSum direct_sum(SystemPtr x_sys, SystemPtr y_sys) {
    const Eigen::Index kx = x_sys->ambient_dim();
    const Eigen::Index ky = y_sys->ambient_dim();
    const Eigen::Index mx = x_sys->dim();
    const Eigen::Index my = y_sys->dim();
    const Eigen::Index k = kx + ky;

    auto block_diag = [&](const CMatrix& a, const CMatrix& b) {
        CMatrix out = CMatrix::Zero(k, k);
        out.topLeftCorner(kx, kx) = a;
        out.bottomRightCorner(ky, ky) = b;
        return out;
    };

    // basis: (1,1), then (b_Xl, 0) for all l, then (0, b_Yl) for l ≥ 1
    std::vector<CMatrix> basis;
    basis.push_back(CMatrix::Identity(k, k));
    for (Eigen::Index l = 0; l < mx; ++l) {
        basis.push_back(block_diag(x_sys->basis(l), CMatrix::Zero(ky, ky)));
    }
    for (Eigen::Index l = 1; l < my; ++l) {
        basis.push_back(block_diag(CMatrix::Zero(kx, kx), y_sys->basis(l)));
    }

    DirectSum ds;
    ds.sum = std::make_shared<OperatorSystem>(std::move(basis));
    ds.x_sys = std::move(x_sys);
    ds.y_sys = std::move(y_sys);

    const Eigen::Index ms = 1 + mx + (my - 1);
    // (x, y) = c_y0·(1,1) + (c_x0 − c_y0)(1_X,0) + Σ_{l≥1} c_xl (b_Xl,0) + Σ_{l≥1} c_yl (0,b_Yl)
    ds.embed = CMatrix::Zero(ms, mx + my);
    ds.embed(0, mx + 0) = 1.0;
    ds.embed(1, 0) = 1.0;
    ds.embed(1, mx + 0) = -1.0;
    for (Eigen::Index l = 1; l < mx; ++l) ds.embed(1 + l, l) = 1.0;
    for (Eigen::Index l = 1; l < my; ++l) ds.embed(mx + l, mx + l) = 1.0;

    ds.project_x = CMatrix::Zero(mx, ms);
    ds.project_x(0, 0) = 1.0;
    ds.project_x(0, 1) = 1.0;
    for (Eigen::Index l = 1; l < mx; ++l) ds.project_x(l, 1 + l) = 1.0;

    ds.project_y = CMatrix::Zero(my, ms);
    ds.project_y(0, 0) = 1.0;
    for (Eigen::Index l = 1; l < my; ++l) ds.project_y(l, mx + l) = 1.0;
    return ds;
}

CMatrix BlockElement::to_matrix(const OperatorSystem& sys) const {
    const Eigen::Index k = sys.ambient_dim();
    CMatrix out = CMatrix::Zero(n * k, n * k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out.block(i * k, j * k, k, k) = sys.to_matrix(entry(i, j));
        }
    }
    return out;
}

BlockElement BlockElement::adjoint(const OperatorSystem& sys) const {
    BlockElement out;
    out.n = n;
    out.entries.resize(entries.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out.entry(i, j) = sys.adjoint_map() * entry(j, i).conjugate();
        }
    }
    return out;
}

bool BlockElement::is_hermitian(const OperatorSystem& sys, double tol) const {
    BlockElement adj = adjoint(sys);
    double scale = 0.0, defect = 0.0;
    for (std::size_t t = 0; t < entries.size(); ++t) {
        scale = std::max(scale, entries[t].norm());
        defect = std::max(defect, (entries[t] - adj.entries[t]).norm());
    }
    return defect <= tol * (1.0 + scale);
}

CMatrix CpMap::apply(const CVector& coeff) const {
    if (coeff.size() != static_cast<Eigen::Index>(images.size())) {
        throw input_error("CpMap::apply: coefficient size mismatch");
    }
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index l = 0; l < coeff.size(); ++l) out += coeff(l) * images[l];
    return out;
}

CMatrix CpMap::apply_matrix(const CMatrix& x) const {
    return apply(system->coefficients(x));
}

Complex MatrixState::apply(const BlockElement& x) const {
    if (x.n != n) throw input_error("MatrixState::apply: level mismatch");
    Complex out = 0.0;
    for (Eigen::Index t = 0; t < n * n; ++t) {
        out += (table.row(t).transpose().cwiseProduct(x.entries[t])).sum();
    }
    return out;
}

Complex MatrixState::apply_unit() const {
    Complex out = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) out += table(i * n + i, 0);
    return out;
}

MatrixState state_of_map(const CpMap& phi) {
    MatrixState sigma;
    sigma.system = phi.system;
    sigma.n = phi.n;
    const Eigen::Index m = phi.system->dim();
    sigma.table.resize(phi.n * phi.n, m);
    for (Eigen::Index l = 0; l < m; ++l) {
        for (Eigen::Index i = 0; i < phi.n; ++i) {
            for (Eigen::Index j = 0; j < phi.n; ++j) {
                sigma.table(i * phi.n + j, l) = phi.images[l](i, j) / double(phi.n);
            }
        }
    }
    return sigma;
}

ScpMap map_of_state_unchecked(const MatrixState& sigma) {
    ScpMap phi;
    phi.system = sigma.system;
    phi.n = sigma.n;
    const Eigen::Index m = sigma.system->dim();
    phi.images.resize(m, CMatrix::Zero(sigma.n, sigma.n));
    for (Eigen::Index l = 0; l < m; ++l) {
        for (Eigen::Index i = 0; i < sigma.n; ++i) {
            for (Eigen::Index j = 0; j < sigma.n; ++j) {
                phi.images[l](i, j) = double(sigma.n) * sigma.value(i, j, l);
            }
        }
    }
    return phi;
}

ScpMap map_of_state(const MatrixState& sigma, Rng rng_for_check, int check_samples) {
    StateCheck chk = is_state(sigma, rng_for_check, check_samples);
    if (!chk.ok) throw input_error("map_of_state: functional is not a state (" + chk.detail + ")");
    return map_of_state_unchecked(sigma);
}

MatrixState restrict_density(const CMatrix& rho, Eigen::Index n, SystemPtr system) {
    const Eigen::Index k = system->ambient_dim();
    if (rho.rows() != n * k || rho.cols() != n * k) {
        throw input_error("restrict_density: density size must be n·k");
    }
    MatrixState sigma;
    sigma.system = system;
    sigma.n = n;
    const Eigen::Index m = system->dim();
    sigma.table.resize(n * n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const CMatrix block = rho.block(j * k, i * k, k, k); // ρ_(j,i)
            for (Eigen::Index l = 0; l < m; ++l) {
                sigma.table(i * n + j, l) = (block * system->basis(l)).trace();
            }
        }
    }
    return sigma;
}

UcpMap scalar_embedding(SystemPtr system, const CVector& state_values, Eigen::Index n) {
    if (state_values.size() != system->dim()) {
        throw input_error("scalar_embedding: state value count mismatch");
    }
    UcpMap phi;
    phi.system = std::move(system);
    phi.n = n;
    phi.images.reserve(state_values.size());
    for (Eigen::Index l = 0; l < state_values.size(); ++l) {
        phi.images.push_back(state_values(l) * CMatrix::Identity(n, n));
    }
    phi.images[0] = CMatrix::Identity(n, n);
    return phi;
}

UcpMap compression(SystemPtr system, const CMatrix& isometry) {
    const Eigen::Index k = system->ambient_dim();
    const Eigen::Index n = isometry.cols();
    if (isometry.rows() != k) throw input_error("compression: isometry must map C^n into C^k");
    if (operator_norm(CMatrix(isometry.adjoint() * isometry - CMatrix::Identity(n, n))) > 1e-10) {
        throw input_error("compression: V*V must be the identity");
    }
    UcpMap phi;
    phi.system = std::move(system);
    phi.n = n;
    phi.images.reserve(phi.system->dim());
    for (Eigen::Index l = 0; l < phi.system->dim(); ++l) {
        phi.images.push_back(isometry.adjoint() * phi.system->basis(l) * isometry);
    }
    phi.images[0] = CMatrix::Identity(n, n);
    return phi;
}

CVector tracial_state_values(const OperatorSystem& sys) {
    CVector v(sys.dim());
    for (Eigen::Index l = 0; l < sys.dim(); ++l) {
        v(l) = sys.basis(l).trace() / double(sys.ambient_dim());
    }
    return v;
}

UcpMap random_ucp(SystemPtr system, Eigen::Index n, std::uint64_t seed) {
    Rng rng(mix_seed(seed, "random_ucp"));
    const Eigen::Index k = system->ambient_dim();
    CMatrix rho = rng.density_matrix(n * k);
    MatrixState sigma = restrict_density(rho, n, system);
    const double unit = sigma.apply_unit().real();
    sigma.table /= unit; // restriction of a global state, so unit ≈ 1 already

    MatrixState mixed = state_of_map(scalar_embedding(system, tracial_state_values(*system), n));
    ScpMap phi = map_of_state_unchecked(sigma);
    double floor = 1e-6;
    for (int attempt = 0; attempt < 4 && min_eigenvalue(phi.unit_image()) < floor; ++attempt) {
        const double t = 4e-3 * std::pow(10.0, attempt);
        sigma.table = (1.0 - t) * sigma.table + t * mixed.table;
        phi = map_of_state_unchecked(sigma);
    }

    const CMatrix r = psd_inv_sqrt(hermitian_part(phi.unit_image()), 1e-9);
    UcpMap out;
    out.system = std::move(system);
    out.n = n;
    out.images.reserve(phi.images.size());
    for (const CMatrix& im : phi.images) out.images.push_back(r * im * r);
    out.images[0] = CMatrix::Identity(n, n);
    return out;
}

StateCheck is_state(const MatrixState& sigma, Rng rng, int samples) {
    StateCheck chk;
    const OperatorSystem& sys = *sigma.system;
    const Eigen::Index n = sigma.n;
    const Eigen::Index m = sys.dim();

    chk.unit_defect = std::abs(sigma.apply_unit() - Complex(1.0, 0.0));
    if (chk.unit_defect > 1e-9) {
        chk.ok = false;
        chk.detail += "unit defect " + std::to_string(chk.unit_defect) + "; ";
    }

    for (int s = 0; s < samples; ++s) {
        BlockElement g;
        g.n = n;
        g.entries.resize(n * n);
        for (Eigen::Index t = 0; t < n * n; ++t) {
            CVector c(m);
            for (Eigen::Index l = 0; l < m; ++l) c(l) = rng.gaussian_complex();
            g.entries[t] = c;
        }
        BlockElement adj = g.adjoint(sys);
        BlockElement h = g;
        for (Eigen::Index t = 0; t < n * n; ++t) {
            h.entries[t] = 0.5 * (g.entries[t] + adj.entries[t]);
        }
        const CMatrix hm = h.to_matrix(sys);
        const double lam = min_eigenvalue(hm);
        const Complex val = sigma.apply(h);
        const double scale = 1.0 + operator_norm(hm);
        chk.worst_reality = std::max(chk.worst_reality, std::abs(val.imag()) / scale);
        const double pos = (val.real() - lam * sigma.apply_unit().real()) / scale;
        chk.worst_positivity = std::min(chk.worst_positivity, pos);
    }
    if (chk.worst_reality > 1e-7) {
        chk.ok = false;
        chk.detail += "functional not Hermitian on samples; ";
    }
    if (chk.worst_positivity < -1e-7) {
        chk.ok = false;
        chk.detail += "negative on sampled psd element; ";
    }
    return chk;
}

MapCheck validate_ucp(const UcpMap& phi, Rng rng, int samples) {
    MapCheck chk;
    const Eigen::Index n = phi.n;
    chk.unit_defect = operator_norm(CMatrix(phi.unit_image() - CMatrix::Identity(n, n)));
    if (chk.unit_defect > 1e-9) {
        chk.ok = false;
        chk.detail += "not unital; ";
    }
    StateCheck st = is_state(state_of_map(phi), rng, samples);
    chk.positivity_defect = st.worst_positivity;
    if (!st.ok) {
        chk.ok = false;
        chk.detail += "associated functional: " + st.detail;
    }
    chk.scp_norm_bound = operator_norm(phi.unit_image());
    return chk;
}

MapCheck validate_scp(const ScpMap& phi, Rng rng, int samples) {
    MapCheck chk;
    MatrixState sigma = state_of_map(phi);
    chk.unit_defect = std::abs(sigma.apply_unit() - Complex(1.0, 0.0));
    if (chk.unit_defect > 1e-9) {
        chk.ok = false;
        chk.detail += "associated functional is not unital; ";
    }
    StateCheck st = is_state(sigma, rng, samples);
    chk.positivity_defect = st.worst_positivity;
    if (!st.ok) {
        chk.ok = false;
        chk.detail += "associated functional: " + st.detail;
    }
    chk.scp_norm_bound = operator_norm(phi.unit_image());
    const double n3 = std::pow(double(phi.n), 3);
    if (chk.scp_norm_bound > n3 + 1e-9) {
        chk.ok = false;
        chk.detail += "‖φ(1)‖ exceeds n³; ";
    }
    return chk;
}

namespace {

// Real-orthonormal Hermitian basis of M_d, as matrices.
std::vector<CMatrix> hermitian_basis(Eigen::Index d) {
    std::vector<CMatrix> out;
    out.reserve(d * d);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index a = 0; a < d; ++a) {
        CMatrix e = CMatrix::Zero(d, d);
        e(a, a) = 1.0;
        out.push_back(e);
    }
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = a + 1; b < d; ++b) {
            CMatrix e = CMatrix::Zero(d, d);
            e(a, b) = inv_sqrt2;
            e(b, a) = inv_sqrt2;
            out.push_back(e);
            CMatrix f = CMatrix::Zero(d, d);
            f(a, b) = Complex(0.0, inv_sqrt2);
            f(b, a) = Complex(0.0, -inv_sqrt2);
            out.push_back(f);
        }
    }
    return out;
}

CMatrix choi_block(const CMatrix& choi, Eigen::Index n, Eigen::Index a, Eigen::Index b) {
    return choi.block(a * n, b * n, n, n);
}

// Φ_C(x) = Σ_ab x_ab C[a][b]
CMatrix choi_apply(const CMatrix& choi, Eigen::Index n, const CMatrix& x) {
    const Eigen::Index k = x.rows();
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            if (x(a, b) != Complex(0.0, 0.0)) out += x(a, b) * choi_block(choi, n, a, b);
        }
    }
    return out;
}

} // namespace

AmbientExtension extend_to_ambient(const UcpMap& phi, double tolerance, int max_iterations) {
    const OperatorSystem& sys = *phi.system;
    const Eigen::Index k = sys.ambient_dim();
    const Eigen::Index n = phi.n;
    const Eigen::Index d = n * k;
    const Eigen::Index m = sys.dim();

    const std::vector<CMatrix> hbasis = hermitian_basis(d);
    const Eigen::Index dim_real = static_cast<Eigen::Index>(hbasis.size());

    // rows: unitality (n² real) + restriction (2n² real per basis element)
    const Eigen::Index rows = n * n + 2 * n * n * m;
    Eigen::MatrixXd amat(rows, dim_real);
    Eigen::VectorXd bvec(rows);

    auto fill_hermitian_rows = [&](Eigen::Index row0, const CMatrix& value,
                                   auto&& evaluate) {
        // evaluate(basis element) -> n×n complex; rows are Re/Im of each entry
        for (Eigen::Index c = 0; c < dim_real; ++c) {
            const CMatrix v = evaluate(hbasis[c]);
            Eigen::Index r = row0;
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    amat(r++, c) = v(i, j).real();
                    amat(r++, c) = v(i, j).imag();
                }
            }
        }
        Eigen::Index r = row0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                bvec(r++) = value(i, j).real();
                bvec(r++) = value(i, j).imag();
            }
        }
    };

    // unitality rows: Σ_a C[a][a] = I (only n² rows needed, the value is Hermitian;
    // we still emit Re/Im pairs for uniformity — half the rows, so n² total pairs)
    {
        Eigen::Index row = 0;
        for (Eigen::Index c = 0; c < dim_real; ++c) {
            CMatrix s = CMatrix::Zero(n, n);
            for (Eigen::Index a = 0; a < k; ++a) s += choi_block(hbasis[c], n, a, a);
            Eigen::Index r = row;
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = i; j < n; ++j) {
                    amat(r++, c) = s(i, j).real();
                    if (j > i) amat(r++, c) = s(i, j).imag();
                }
            }
        }
        Eigen::Index r = row;
        const CMatrix eye = CMatrix::Identity(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                bvec(r++) = eye(i, j).real();
                if (j > i) bvec(r++) = eye(i, j).imag();
            }
        }
    }
    Eigen::Index row = n * n;
    for (Eigen::Index l = 0; l < m; ++l) {
        const CMatrix& bl = sys.basis(l);
        fill_hermitian_rows(row, phi.images[l],
                            [&](const CMatrix& h) { return choi_apply(h, n, bl); });
        row += 2 * n * n;
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(amat);

    auto to_coords = [&](const CMatrix& c) {
        Eigen::VectorXd r(dim_real);
        for (Eigen::Index i = 0; i < dim_real; ++i) r(i) = fro_inner(hbasis[i], c);
        return r;
    };
    auto from_coords = [&](const Eigen::VectorXd& r) {
        CMatrix c = CMatrix::Zero(d, d);
        for (Eigen::Index i = 0; i < dim_real; ++i) c += r(i) * hbasis[i];
        return c;
    };

    auto restriction_error = [&](const CMatrix& choi) {
        double err = 0.0;
        for (Eigen::Index l = 0; l < m; ++l) {
            err = std::max(err, operator_norm(CMatrix(choi_apply(choi, n, sys.basis(l)) -
                                                      phi.images[l])));
        }
        return err;
    };

    // start from the Choi matrix of x ↦ tr(x)/k · 1
    CMatrix x = CMatrix::Identity(d, d) / double(k);
    CMatrix best = x;
    double best_err = restriction_error(best);

    for (int it = 0; it < max_iterations; ++it) {
        // affine projection
        Eigen::VectorXd r = to_coords(x);
        r -= cod.solve(amat * r - bvec);
        CMatrix y = from_coords(r);
        // psd projection, over-relaxed once the iteration settles
        auto dec = eigh(hermitian_part(y));
        RVector clipped = dec.eigenvalues.cwiseMax(0.0);
        CMatrix zp = dec.eigenvectors * clipped.asDiagonal() * dec.eigenvectors.adjoint();
        const double relax = it < 50 ? 1.0 : 1.85;
        x = (1.0 - relax) * x + relax * zp;
        // keep the iterate Hermitian against accumulated rounding
        x = hermitian_part(x);

        if (it % 10 == 9 || it == max_iterations - 1) {
            // renormalize the psd iterate to exactly unital and measure
            CMatrix s = CMatrix::Zero(n, n);
            for (Eigen::Index a = 0; a < k; ++a) s += choi_block(zp, n, a, a);
            s = hermitian_part(s);
            if (min_eigenvalue(s) > 1e-9) {
                const CMatrix rr = psd_inv_sqrt(s, 1e-10);
                const CMatrix conj_op = kron(CMatrix::Identity(k, k), rr);
                const CMatrix cand = conj_op * zp * conj_op.adjoint();
                const double err = restriction_error(cand);
                if (err < best_err) {
                    best = cand;
                    best_err = err;
                }
                if (best_err <= tolerance * 0.2) break;
            }
        }
    }

    AmbientExtension result;
    result.restriction_error = best_err;
    result.ok = best_err <= tolerance;

    SystemPtr full = full_matrix_system(k);
    UcpMap ext;
    ext.system = full;
    ext.n = n;
    ext.images.reserve(full->dim());
    for (Eigen::Index l = 0; l < full->dim(); ++l) {
        ext.images.push_back(choi_apply(best, n, full->basis(l)));
    }
    ext.images[0] = CMatrix::Identity(n, n);
    result.extension = std::move(ext);
    return result;
}

} // namespace cqms::opsys
