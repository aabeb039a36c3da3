#include "cqms/lipnorm.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cqms::lip {

using opsys::OperatorSystem;

// ---------------------------------------------------------------------------
// automorphisms

CVector Automorphism::apply_coeff(const OperatorSystem& sys, const CVector& coeff) const {
    switch (kind) {
        case Kind::coefficient:
            return matrix * coeff;
        case Kind::unitary_conjugation:
        case Kind::ambient_linear:
            return sys.coefficients(apply_matrix(sys, sys.to_matrix(coeff)), 1e-7);
    }
    throw input_error("Automorphism: unknown kind");
}

CMatrix Automorphism::apply_matrix(const OperatorSystem& sys, const CMatrix& x) const {
    switch (kind) {
        case Kind::unitary_conjugation:
            return matrix * x * matrix.adjoint();
        case Kind::ambient_linear:
            return unvec(matrix * vec(x), x.rows(), x.cols());
        case Kind::coefficient:
            return sys.to_matrix(matrix * sys.coefficients(x));
    }
    throw input_error("Automorphism: unknown kind");
}

// ---------------------------------------------------------------------------
// branch machinery: action/functional/scaled/direct-sum Lip-norms evaluate
// exactly as max_i ‖Σ_l c_l A_il‖ over precomputed images A_il

namespace detail {

struct Branch {
    std::vector<CMatrix> images; // one per basis coefficient
};

struct BranchSet {
    std::vector<Branch> branches;
};

} // namespace detail

using detail::Branch;
using detail::BranchSet;

namespace {

CMatrix branch_matrix(const Branch& br, const CVector& coeff) {
    CMatrix m = CMatrix::Zero(br.images[0].rows(), br.images[0].cols());
    for (Eigen::Index l = 0; l < coeff.size(); ++l) {
        if (coeff(l) != Complex(0.0, 0.0)) m += coeff(l) * br.images[l];
    }
    return m;
}

void lift_branches(const std::vector<Branch>& src, const CMatrix& projector,
                   std::vector<Branch>& dst) {
    const Eigen::Index ms = projector.cols();
    for (const Branch& br : src) {
        Branch lifted;
        lifted.images.resize(ms, CMatrix::Zero(br.images[0].rows(), br.images[0].cols()));
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            for (Eigen::Index l = 0; l < projector.rows(); ++l) {
                if (projector(l, ls) != Complex(0.0, 0.0)) {
                    lifted.images[ls] += projector(l, ls) * br.images[l];
                }
            }
        }
        dst.push_back(std::move(lifted));
    }
}

// Branch form of a bridge over the direct-sum coefficients.
void bridge_branches(const metrics::Bridge& bridge, const opsys::DirectSum& split,
                     std::vector<Branch>& dst) {
    const OperatorSystem& xs = *split.x_sys;
    const OperatorSystem& ys = *split.y_sys;
    const Eigen::Index ms = split.sum->dim();
    using namespace metrics;

    auto x_coeff_of = [&](Eigen::Index ls) { return CVector(split.project_x.col(ls)); };
    auto y_coeff_of = [&](Eigen::Index ls) { return CVector(split.project_y.col(ls)); };

    if (const auto* p = std::get_if<PointBridge>(&bridge.variant)) {
        Branch br;
        br.images.resize(ms);
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            Complex v = (p->sigma0.transpose() * x_coeff_of(ls))(0) -
                        (p->omega0.transpose() * y_coeff_of(ls))(0);
            CMatrix m(1, 1);
            m(0, 0) = v / p->gamma;
            br.images[ls] = m;
        }
        dst.push_back(std::move(br));
        return;
    }
    if (const auto* nb = std::get_if<NormBridge>(&bridge.variant)) {
        if (xs.ambient_dim() != ys.ambient_dim()) {
            throw input_error("NormBridge: summands must share an ambient algebra");
        }
        Branch br;
        br.images.resize(ms);
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            br.images[ls] =
                (xs.to_matrix(x_coeff_of(ls)) - ys.to_matrix(y_coeff_of(ls))) / nb->eps;
        }
        dst.push_back(std::move(br));
        return;
    }
    if (const auto* qb = std::get_if<QuotientBridge>(&bridge.variant)) {
        Branch br;
        br.images.resize(ms);
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            br.images[ls] =
                ys.to_matrix(CVector(qb->phi * x_coeff_of(ls) - y_coeff_of(ls))) / qb->eta;
        }
        dst.push_back(std::move(br));
        return;
    }
    if (const auto* sb = std::get_if<ScalingBridge>(&bridge.variant)) {
        const Eigen::Index k = xs.ambient_dim();
        Branch br;
        br.images.resize(ms);
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            CVector cy = y_coeff_of(ls);
            br.images[ls] = sb->lambda / sb->big_c *
                            (xs.to_matrix(x_coeff_of(ls)) - cy(0) * CMatrix::Identity(k, k));
        }
        dst.push_back(std::move(br));
        return;
    }
    const auto& fb = std::get<FunctionalBridge>(bridge.variant);
    for (std::size_t i = 0; i < fb.x_maps.size(); ++i) {
        Branch br;
        br.images.resize(ms);
        for (Eigen::Index ls = 0; ls < ms; ++ls) {
            CMatrix m = CMatrix::Zero(fb.x_maps[i][0].rows(), fb.x_maps[i][0].cols());
            CVector cx = x_coeff_of(ls), cy = y_coeff_of(ls);
            for (Eigen::Index l = 0; l < cx.size(); ++l) m += cx(l) * fb.x_maps[i][l];
            for (Eigen::Index l = 0; l < cy.size(); ++l) m += cy(l) * fb.y_maps[i][l];
            br.images[ls] = m;
        }
        dst.push_back(std::move(br));
    }
}

std::shared_ptr<const BranchSet> build_branches(const LipNorm::Variant& variant,
                                                const OperatorSystem& sys,
                                                const opsys::SystemPtr& /*system*/) {
    auto out = std::make_shared<BranchSet>();
    if (const auto* a = std::get_if<ActionLip>(&variant)) {
        for (std::size_t g = 0; g < a->automorphisms.size(); ++g) {
            Branch br;
            br.images.reserve(sys.dim());
            for (Eigen::Index l = 0; l < sys.dim(); ++l) {
                const CMatrix bl = sys.basis(l);
                br.images.push_back(
                    (a->automorphisms[g].apply_matrix(sys, bl) - bl) / a->lengths[g]);
            }
            out->branches.push_back(std::move(br));
        }
        return out;
    }
    if (const auto* f = std::get_if<FunctionalLip>(&variant)) {
        for (const auto& maps : f->maps) {
            Branch br;
            br.images = maps;
            out->branches.push_back(std::move(br));
        }
        return out;
    }
    if (const auto* s = std::get_if<ScaledLip>(&variant)) {
        const BranchSet* inner = s->inner->branch_set();
        if (!inner) return nullptr;
        for (const Branch& br : inner->branches) {
            Branch scaled = br;
            for (CMatrix& im : scaled.images) im *= s->factor;
            out->branches.push_back(std::move(scaled));
        }
        return out;
    }
    if (const auto* d = std::get_if<DirectSumLip>(&variant)) {
        const BranchSet* left = d->left->branch_set();
        const BranchSet* right = d->right->branch_set();
        if (!left || !right) return nullptr;
        lift_branches(left->branches, d->split.project_x, out->branches);
        lift_branches(right->branches, d->split.project_y, out->branches);
        bridge_branches(d->bridge, d->split, out->branches);
        return out;
    }
    return nullptr; // quotient
}

// ‖M(c)‖ and a subgradient with the convention dF(δ) = Re⟨grad, δ⟩.
double branch_value_grad(const Branch& br, const CVector& coeff, CVector* grad) {
    CMatrix m = branch_matrix(br, coeff);
    if (m.rows() == 1 && m.cols() == 1) {
        const Complex s = m(0, 0);
        const double v = std::abs(s);
        if (grad) {
            grad->resize(coeff.size());
            const Complex phase = v > 1e-300 ? s / v : Complex(1.0, 0.0);
            for (Eigen::Index l = 0; l < coeff.size(); ++l) {
                (*grad)(l) = std::conj(std::conj(phase) * br.images[l](0, 0));
            }
        }
        return v;
    }
    Eigen::JacobiSVD<CMatrix> svd(m, grad ? Eigen::ComputeThinU | Eigen::ComputeThinV : 0);
    const double v = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    if (grad) {
        grad->resize(coeff.size());
        const CVector u = svd.matrixU().col(0);
        const CVector w = svd.matrixV().col(0);
        for (Eigen::Index l = 0; l < coeff.size(); ++l) {
            (*grad)(l) = std::conj((u.adjoint() * br.images[l] * w)(0));
        }
    }
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// LipNorm core

LipNorm::LipNorm(opsys::SystemPtr system, Variant variant)
    : system_(std::move(system)), variant_(std::move(variant)) {
    if (const auto* a = std::get_if<ActionLip>(&variant_)) {
        if (a->automorphisms.size() != a->lengths.size()) {
            throw input_error("ActionLip: automorphism/length count mismatch");
        }
        if (a->automorphisms.empty()) throw input_error("ActionLip: empty sample");
        for (double l : a->lengths) {
            if (!(l > 0.0)) throw input_error("ActionLip: lengths must be positive");
        }
    }
    if (const auto* f = std::get_if<FunctionalLip>(&variant_)) {
        for (const auto& maps : f->maps) {
            if (static_cast<Eigen::Index>(maps.size()) != system_->dim()) {
                throw input_error("FunctionalLip: image count must match basis size");
            }
            if (operator_norm(maps[0]) > 1e-10) {
                throw input_error("FunctionalLip: maps must annihilate the unit");
            }
        }
    }
    if (const auto* q = std::get_if<QuotientLip>(&variant_)) {
        if (q->phi.rows() != system_->dim() || q->phi.cols() != q->parent->system()->dim()) {
            throw input_error("QuotientLip: coefficient map has wrong shape");
        }
        CVector e0 = CVector::Zero(q->parent->system()->dim());
        e0(0) = 1.0;
        CVector img = q->phi * e0;
        img(0) -= 1.0;
        if (img.norm() > 1e-10) throw input_error("QuotientLip: map must be unital");
        Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(q->phi);
        if (cod.rank() < system_->dim()) {
            throw input_error("QuotientLip: map must be surjective");
        }
    }
    if (const auto* s = std::get_if<ScaledLip>(&variant_)) {
        if (!(s->factor > 0.0)) throw input_error("ScaledLip: factor must be positive");
    }
    branches_ = build_branches(variant_, *system_, system_);
    compute_coercivity();
}

LipNorm::QuotientEval LipNorm::quotient_eval(const CVector& coeff) const {
    const auto& q = std::get<QuotientLip>(variant_);
    const Eigen::Index mp = q.parent->system()->dim();

    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(q.phi);
    CVector x0 = cod.solve(coeff);
    if ((q.phi * x0 - coeff).norm() > 1e-8 * (1.0 + coeff.norm())) {
        throw input_error("QuotientLip: element has empty fiber");
    }
    Eigen::JacobiSVD<CMatrix> svd(q.phi, Eigen::ComputeFullV);
    const Eigen::Index rank = cod.rank();
    const Eigen::Index kdim = mp - rank;
    if (kdim == 0) {
        return {q.parent->eval(x0).value, x0};
    }
    CMatrix kernel = svd.matrixV().rightCols(kdim);

    auto objective = [&](const RVector& z, RVector& g) {
        CVector zc(kdim);
        for (Eigen::Index i = 0; i < kdim; ++i) zc(i) = Complex(z(i), z(i + kdim));
        CVector gp;
        const double val = q.parent->eval_with_grad(CVector(x0 + kernel * zc), gp);
        CVector gz = kernel.adjoint() * gp;
        g.resize(2 * kdim);
        for (Eigen::Index i = 0; i < kdim; ++i) {
            g(i) = gz(i).real();
            g(i + kdim) = gz(i).imag();
        }
        return val;
    };
    ConvexMinResult res = minimize_subgradient(objective, RVector::Zero(2 * kdim), 10000, 1e-8);
    CVector zc(kdim);
    for (Eigen::Index i = 0; i < kdim; ++i) zc(i) = Complex(res.argmin(i), res.argmin(i + kdim));
    return {res.value, CVector(x0 + kernel * zc)};
}

SeminormValue LipNorm::eval(const CVector& coeff) const {
    if (coeff.size() != system_->dim()) throw input_error("LipNorm::eval: size mismatch");
    if (branches_) {
        double best = 0.0;
        for (const Branch& br : branches_->branches) {
            best = std::max(best, branch_value_grad(br, coeff, nullptr));
        }
        return SeminormValue::exact(best);
    }
    const double v = quotient_eval(coeff).value;
    return SeminormValue::bracketed(v, v);
}

double LipNorm::eval_with_grad(const CVector& coeff, CVector& grad) const {
    if (branches_) {
        if (branches_->branches.empty()) {
            grad = CVector::Zero(coeff.size());
            return 0.0;
        }
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < branches_->branches.size(); ++i) {
            const double v = branch_value_grad(branches_->branches[i], coeff, nullptr);
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        branch_value_grad(branches_->branches[arg], coeff, &grad);
        return best;
    }
    const auto& q = std::get<QuotientLip>(variant_);
    QuotientEval qe = quotient_eval(coeff);
    CVector gp(qe.parent_argmin.size());
    q.parent->eval_with_grad(qe.parent_argmin, gp);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(q.phi);
    CMatrix pinv = cod.solve(CMatrix(CMatrix::Identity(q.phi.rows(), q.phi.rows())));
    grad = pinv.adjoint() * gp;
    return qe.value;
}

SeminormValue LipNorm::eval_matrix(const CMatrix& x) const {
    return eval(system_->coefficients(x));
}

double LipNorm::eval_sa(const RVector& quotient_coords) const {
    const auto& sa_coeffs = system_->sa_basis_coeffs();
    CVector c = CVector::Zero(system_->dim());
    for (Eigen::Index i = 0; i < quotient_coords.size(); ++i) {
        c += quotient_coords(i) * sa_coeffs[i + 1];
    }
    return eval(c).value;
}

double LipNorm::eval_sa_with_grad(const RVector& quotient_coords, RVector& grad) const {
    const auto& sa_coeffs = system_->sa_basis_coeffs();
    CVector c = CVector::Zero(system_->dim());
    for (Eigen::Index i = 0; i < quotient_coords.size(); ++i) {
        c += quotient_coords(i) * sa_coeffs[i + 1];
    }
    CVector gc;
    const double v = eval_with_grad(c, gc);
    grad.resize(quotient_coords.size());
    for (Eigen::Index i = 0; i < quotient_coords.size(); ++i) {
        grad(i) = (gc.real().dot(sa_coeffs[i + 1].real()) +
                   gc.imag().dot(sa_coeffs[i + 1].imag()));
    }
    return v;
}

SeminormValue LipNorm::eval_e(const CVector& coeff, Rng* refine_rng, int refine_samples) const {
    const CVector adj = system_->adjoint_map() * coeff.conjugate();
    const double scale = coeff.norm();
    if ((adj - coeff).norm() <= 1e-10 * (1.0 + scale)) {
        return eval(coeff); // self-adjoint: L^e = L
    }
    const CVector re = 0.5 * (coeff + adj);
    const CVector im_part = (coeff - adj) / Complex(0.0, 2.0);
    const double lre = eval(re).value;
    const double lim = eval(im_part).value;
    double lower = std::max(lre, lim);
    const double upper = lre + lim;

    if (refine_rng && refine_samples > 0 && coercivity_) {
        const double alpha = *coercivity_;
        const auto& sab = system_->sa_basis();
        const Eigen::Index k = system_->ambient_dim();
        const Eigen::Index h = system_->hermitian_dim();
        for (int s = 0; s < refine_samples; ++s) {
            const CVector xi = refine_rng->unit_vector(k);
            const CVector et = refine_rng->unit_vector(k);
            Complex num = 0.0;
            RVector diff(h - 1);
            for (Eigen::Index l = 0; l < system_->dim(); ++l) {
                const CMatrix& b = system_->basis(l);
                num += coeff(l) * ((xi.adjoint() * b * xi)(0) - (et.adjoint() * b * et)(0));
            }
            for (Eigen::Index i = 1; i < h; ++i) {
                diff(i - 1) =
                    ((xi.adjoint() * sab[i] * xi)(0) - (et.adjoint() * sab[i] * et)(0)).real();
            }
            // ρ(σ,ω) ≤ ‖(σ−ω)|_quotient‖₂ / α gives a certified ratio lower bound
            const double rho_upper = diff.norm() / alpha;
            if (rho_upper > 1e-12) {
                lower = std::max(lower, std::abs(num) / rho_upper);
            }
        }
        lower = std::min(lower, upper);
    }
    return SeminormValue::bracketed(lower, upper);
}

SeminormValue LipNorm::eval_n(const opsys::BlockElement& x) const {
    double lower = 0.0, upper = 0.0;
    bool all_exact = true;
    for (const CVector& c : x.entries) {
        SeminormValue v = eval_e(c);
        lower = std::max(lower, v.lower);
        upper = std::max(upper, v.upper);
        all_exact = all_exact && v.kind == SeminormValue::Kind::exact;
    }
    return all_exact ? SeminormValue::exact(upper) : SeminormValue::bracketed(lower, upper);
}

std::optional<double> LipNorm::diameter_upper() const {
    if (!coercivity_ || *coercivity_ <= 0.0) return std::nullopt;
    return 2.0 / *coercivity_;
}

void LipNorm::compute_coercivity() {
    const Eigen::Index h = system_->hermitian_dim();
    if (h <= 1) {
        coercivity_ = std::nullopt; // no quotient directions; the diameter is zero
        return;
    }
    if (!branches_) {
        const auto& q = std::get<QuotientLip>(variant_);
        auto pa = q.parent->coercivity();
        if (!pa) {
            coercivity_ = std::nullopt;
            return;
        }
        const OperatorSystem& ps = *q.parent->system();
        const Eigen::Index hp = ps.hermitian_dim();
        Eigen::MatrixXd qmap(h - 1, hp - 1);
        for (Eigen::Index j = 1; j < hp; ++j) {
            const CVector child = q.phi * ps.sa_basis_coeffs()[j];
            const CMatrix child_mat = system_->to_matrix(child);
            for (Eigen::Index i = 1; i < h; ++i) {
                qmap(i - 1, j - 1) = fro_inner(system_->sa_basis()[i], child_mat);
            }
        }
        const double opn = qmap.jacobiSvd().singularValues()(0);
        coercivity_ = opn > 0.0 ? std::optional<double>(*pa / opn) : std::nullopt;
        return;
    }
    if (branches_->branches.empty()) {
        coercivity_ = std::nullopt;
        return;
    }
    const double nb = static_cast<double>(branches_->branches.size());
    Eigen::Index rows = 0;
    for (const Branch& br : branches_->branches) rows += 2 * br.images[0].size();
    Eigen::MatrixXd stack(rows, h - 1);
    Eigen::Index r0 = 0;
    for (const Branch& br : branches_->branches) {
        const double rmax =
            static_cast<double>(std::min(br.images[0].rows(), br.images[0].cols()));
        const double w = 1.0 / std::sqrt(nb * rmax);
        for (Eigen::Index j = 1; j < h; ++j) {
            CMatrix img = branch_matrix(br, system_->sa_basis_coeffs()[j]);
            Eigen::Index r = r0;
            for (Eigen::Index t = 0; t < img.size(); ++t) {
                stack(r++, j - 1) = w * img.data()[t].real();
                stack(r++, j - 1) = w * img.data()[t].imag();
            }
        }
        r0 += 2 * br.images[0].size();
    }
    const auto sv = stack.jacobiSvd().singularValues();
    const double smin = sv(sv.size() - 1);
    coercivity_ = smin > 1e-12 ? std::optional<double>(smin) : std::nullopt;
}

// ---------------------------------------------------------------------------
// constructors

LipNormPtr make_action_lip(opsys::SystemPtr system, std::vector<Automorphism> autos,
                           std::vector<double> lengths) {
    return std::make_shared<LipNorm>(std::move(system),
                                     ActionLip{std::move(autos), std::move(lengths)});
}

LipNormPtr make_functional_lip(opsys::SystemPtr system, std::vector<std::vector<CMatrix>> maps) {
    return std::make_shared<LipNorm>(std::move(system), FunctionalLip{std::move(maps)});
}

LipNormPtr make_quotient_lip(opsys::SystemPtr system, LipNormPtr parent, CMatrix phi) {
    return std::make_shared<LipNorm>(std::move(system),
                                     QuotientLip{std::move(parent), std::move(phi)});
}

LipNormPtr make_scaled_lip(LipNormPtr inner, double factor) {
    auto sys = inner->system();
    return std::make_shared<LipNorm>(sys, ScaledLip{std::move(inner), factor});
}

LipNormPtr make_direct_sum_lip(LipNormPtr left, LipNormPtr right, metrics::Bridge bridge) {
    opsys::DirectSum split = opsys::direct_sum(left->system(), right->system());
    auto sum = split.sum;
    return std::make_shared<LipNorm>(
        sum, DirectSumLip{std::move(left), std::move(right), std::move(bridge), std::move(split)});
}

TwoPoint make_two_point(double d) {
    if (!(d > 0.0)) throw input_error("make_two_point: d must be positive");
    TwoPoint tp;
    tp.d = d;
    tp.system = opsys::diagonal_system(2);
    // basis {1, e_22}: diag(a,b) = a·1 + (b−a)·e_22, so (a−b)/d = −c_1/d
    std::vector<CMatrix> t(2);
    t[0] = CMatrix::Zero(1, 1);
    t[1] = CMatrix::Zero(1, 1);
    t[1](0, 0) = -1.0 / d;
    tp.lip = make_functional_lip(tp.system, {t});
    return tp;
}

LipNormPtr make_point_lip() {
    return make_functional_lip(opsys::scalar_system(), {});
}

// ---------------------------------------------------------------------------
// validation

ValidationReport validate_lipnorm(const LipNorm& lip, Rng rng, int samples) {
    ValidationReport rep;
    const OperatorSystem& sys = *lip.system();
    const Eigen::Index m = sys.dim();
    const Eigen::Index h = sys.hermitian_dim();

    // kernel = scalars, via rank of the stacked defining maps when available
    if (const BranchSet* bs = lip.branch_set()) {
        if (h > 1) {
            Eigen::Index rows = 0;
            for (const Branch& br : bs->branches) rows += 2 * br.images[0].size();
            if (rows == 0) {
                rep.kernel_ok = false;
            } else {
                Eigen::MatrixXd stack(rows, h - 1);
                Eigen::Index r0 = 0;
                for (const Branch& br : bs->branches) {
                    for (Eigen::Index j = 1; j < h; ++j) {
                        CMatrix img = branch_matrix(br, sys.sa_basis_coeffs()[j]);
                        Eigen::Index r = r0;
                        for (Eigen::Index t = 0; t < img.size(); ++t) {
                            stack(r++, j - 1) = img.data()[t].real();
                            stack(r++, j - 1) = img.data()[t].imag();
                        }
                    }
                    r0 += 2 * br.images[0].size();
                }
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stack);
                qr.setThreshold(1e-9);
                rep.kernel_ok = qr.rank() == h - 1;
            }
        }
        if (!rep.kernel_ok) rep.detail += "kernel larger than the scalars; ";
    } else {
        const auto& q = std::get<QuotientLip>(lip.variant());
        ValidationReport parent_rep =
            validate_lipnorm(*q.parent, rng.child("parent"), std::max(8, samples / 2));
        rep.kernel_ok = parent_rep.kernel_ok;
        rep.notes.push_back("kernel inherited from the parent through a surjective unital map");
    }

    {
        CVector unit = CVector::Zero(m);
        unit(0) = 1.0;
        if (lip.eval(unit).value > 1e-9) {
            rep.kernel_ok = false;
            rep.detail += "L(1) != 0; ";
        }
    }

    const bool noisy = lip.branch_set() == nullptr;
    const double axis_tol = noisy ? 1e-5 : 1e-9;

    for (int s = 0; s < samples; ++s) {
        CVector x(m), y(m);
        for (Eigen::Index l = 0; l < m; ++l) {
            x(l) = rng.gaussian_complex();
            y(l) = rng.gaussian_complex();
        }
        const double lx = lip.eval(x).value;
        const double ly = lip.eval(y).value;
        const double t = rng.uniform(-2.0, 2.0);
        const double hom = std::abs(lip.eval(CVector(t * x)).value - std::abs(t) * lx);
        rep.worst_homogeneity = std::max(rep.worst_homogeneity, hom / (1.0 + std::abs(t) * lx));
        const double tri = lip.eval(CVector(x + y)).value - lx - ly;
        rep.worst_triangle = std::max(rep.worst_triangle, tri / (1.0 + lx + ly));
        const CVector xadj = sys.adjoint_map() * x.conjugate();
        const double adj = std::abs(lip.eval(xadj).value - lx);
        rep.worst_adjoint = std::max(rep.worst_adjoint, adj / (1.0 + lx));
    }
    rep.seminorm_ok = rep.worst_homogeneity <= axis_tol && rep.worst_triangle <= axis_tol;
    rep.adjoint_ok = rep.worst_adjoint <= (noisy ? 1e-5 : 1e-10);
    if (!rep.seminorm_ok) rep.detail += "seminorm axioms violated on samples; ";
    if (!rep.adjoint_ok) rep.detail += "not adjoint-invariant on samples; ";

    rep.notes.push_back("D_1(L) closed: automatic for finite-dimensional seminorms");
    rep.notes.push_back("weak*-metrization: automatic on finite-dimensional state spaces");

    rep.ok = rep.kernel_ok && rep.seminorm_ok && rep.adjoint_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// f-Leibniz checker

LeibnizReport check_f_leibniz(const LipNorm& lip, const LeibnizF& f, int samples,
                              std::uint64_t seed, double slack) {
    const OperatorSystem& sys = *lip.system();
    const Eigen::Index m = sys.dim();

    if (!lip.branch_set()) {
        throw input_error("check_f_leibniz: needs a finite defining formula "
                          "(action/functional/scaled variant)");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (!sys.contains(CMatrix(sys.basis(i) * sys.basis(j)), 1e-8)) {
                throw input_error("check_f_leibniz: system is not closed under products");
            }
        }
    }

    LeibnizReport rep;
    rep.samples = samples;
    rep.usual_leibniz = std::abs(f(1.0, 2.0, 3.0, 4.0) - 11.0) < 1e-12 &&
                        std::abs(f(0.5, 0.25, 2.0, 3.0) - 1.75) < 1e-12;

    Rng rng(mix_seed(seed, "f_leibniz"));
    for (int s = 0; s < samples; ++s) {
        CVector cx(m), cy(m);
        for (Eigen::Index l = 0; l < m; ++l) {
            cx(l) = rng.gaussian_complex();
            cy(l) = rng.gaussian_complex();
        }
        const double sx = rng.uniform(0.25, 4.0);
        const double sy = rng.uniform(0.25, 4.0);
        cx *= sx;
        cy *= sy;
        const CMatrix x = sys.to_matrix(cx);
        const CMatrix y = sys.to_matrix(cy);
        const double lx = lip.eval(cx).value;
        const double ly = lip.eval(cy).value;
        const CMatrix xy = x * y;
        const double lxy = lip.eval(sys.coefficients(xy, 1e-7)).value;
        const double bound = f(lx, ly, operator_norm(y), operator_norm(x));
        const double violation = lxy - bound;
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.witness_x = cx;
            rep.witness_y = cy;
        }
        if (violation > slack) ++rep.violations;
    }
    rep.ok = rep.violations == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// subgradient minimizer

ConvexMinResult minimize_subgradient(
    const std::function<double(const RVector&, RVector&)>& value_and_grad, const RVector& z0,
    int max_iterations, double stall_tol) {
    ConvexMinResult res;
    RVector z = z0;
    RVector g(z0.size());
    double best = value_and_grad(z, g);
    RVector zbest = z;

    if (z0.size() == 0) {
        res.argmin = z0;
        res.value = best;
        return res;
    }

    double step = 1.0 + z0.norm();
    int since_improvement = 0;
    int it = 0;
    for (; it < max_iterations; ++it) {
        const double gn = g.norm();
        if (gn < 1e-14) break;
        z -= (step / gn) * g;
        const double v = value_and_grad(z, g);
        if (v < best - stall_tol * (1.0 + std::abs(best))) {
            best = v;
            zbest = z;
            since_improvement = 0;
        } else {
            if (v < best) {
                best = v;
                zbest = z;
            }
            ++since_improvement;
        }
        if (since_improvement >= 40) {
            step *= 0.5;
            z = zbest;
            RVector gtmp(z.size());
            value_and_grad(z, gtmp);
            g = gtmp;
            since_improvement = 0;
            if (step < 1e-12) {
                res.stalled = true;
                break;
            }
        }
    }
    res.argmin = zbest;
    res.value = best;
    res.iterations = it;
    return res;
}

} // namespace cqms::lip
