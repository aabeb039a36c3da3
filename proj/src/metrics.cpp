#include "cqms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cqms::metrics {

using lip::LipNorm;
using lip::LipNormPtr;
using opsys::BlockElement;
using opsys::OperatorSystem;
using opsys::SystemPtr;
using opsys::UcpMap;

const char* MetricEstimate::kind_name(Kind k) {
    switch (k) {
        case Kind::exact: return "exact";
        case Kind::upper: return "upper";
        case Kind::lower: return "lower";
        case Kind::heuristic: return "heuristic";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------------------
// search utilities on the self-adjoint quotient

// maximize ⟨v,z⟩ / L(z) over directions; returns z scaled to L(z) = 1
struct LinMaxResult {
    RVector z;
    double value = 0.0;
};

LinMaxResult linear_max_over_ball(const LipNorm& lip, const RVector& v, Rng& rng, int starts,
                                  int iters) {
    const Eigen::Index p = v.size();
    LinMaxResult best;
    best.z = RVector::Zero(p);

    auto ratio = [&](const RVector& z, RVector* grad_out) {
        RVector gl(p);
        const double lz = lip.eval_sa_with_grad(z, gl);
        const double num = v.dot(z);
        if (lz < 1e-13) {
            if (grad_out) grad_out->setZero(p);
            return -1.0; // direction in the kernel: skip
        }
        const double val = num / lz;
        if (grad_out) *grad_out = (v - val * gl) / lz;
        return val;
    };

    std::vector<RVector> seeds;
    seeds.push_back(v);
    for (int s = 1; s < starts; ++s) seeds.push_back(rng.gaussian_vector(p));

    for (RVector z : seeds) {
        if (z.norm() < 1e-14) continue;
        z.normalize();
        if (ratio(z, nullptr) < 0) z = -z;
        double step = 0.5;
        RVector g(p);
        double cur = ratio(z, &g);
        for (int it = 0; it < iters; ++it) {
            if (g.norm() < 1e-13) break;
            RVector znew = z + step * g / g.norm();
            if (znew.norm() < 1e-14) break;
            znew.normalize();
            RVector gnew(p);
            const double vnew = ratio(znew, &gnew);
            if (vnew > cur) {
                z = znew;
                g = gnew;
                cur = vnew;
            } else {
                step *= 0.6;
                if (step < 1e-10) break;
            }
        }
        if (cur > best.value) {
            best.value = cur;
            best.z = z;
        }
    }
    const double lz = best.value > 0.0 ? lip.eval_sa(best.z) : 1.0;
    if (best.value > 0.0 && lz > 1e-13) best.z /= lz;
    return best;
}

RVector scale_to_unit_lip(const LipNorm& lip, RVector z) {
    const double l = lip.eval_sa(z);
    if (l < 1e-13) return RVector::Zero(z.size());
    return z / l;
}

// Images of the sa quotient basis under a u.c.p. map.
std::vector<CMatrix> sa_images(const LipNorm& lip, const UcpMap& phi) {
    const auto& coeffs = lip.system()->sa_basis_coeffs();
    std::vector<CMatrix> out;
    out.reserve(coeffs.size() - 1);
    for (std::size_t i = 1; i < coeffs.size(); ++i) out.push_back(phi.apply(coeffs[i]));
    return out;
}

CMatrix combine(const std::vector<CMatrix>& imgs, const RVector& z) {
    CMatrix m = CMatrix::Zero(imgs[0].rows(), imgs[0].cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (z(i) != 0.0) m += z(i) * imgs[i];
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// rho

double two_point_rho_oracle(double d, const CMatrix& a, const CMatrix& b) {
    return d * operator_norm(CMatrix(a - b));
}

MetricEstimate rho_ln(const LipNorm& lip, Eigen::Index n, const UcpMap& phi, const UcpMap& psi,
                      const RhoOptions& opts) {
    if (!phi.system->same_as(*lip.system()) || !psi.system->same_as(*lip.system())) {
        throw input_error("rho_ln: maps must live on the Lip-norm's system");
    }
    if (phi.n != n || psi.n != n) throw input_error("rho_ln: level mismatch");

    MetricEstimate est;
    est.n = n;
    est.seed = opts.seed;

    const Eigen::Index p = lip.system()->hermitian_dim() - 1;
    if (p <= 0) {
        est.kind = MetricEstimate::Kind::exact;
        est.value = 0.0;
        return est;
    }

    std::vector<CMatrix> dx = sa_images(lip, phi);
    std::vector<CMatrix> dy = sa_images(lip, psi);
    std::vector<CMatrix> diff(dx.size());
    for (std::size_t i = 0; i < dx.size(); ++i) diff[i] = dx[i] - dy[i];

    auto objective = [&](const RVector& z) { return operator_norm(combine(diff, z)); };

    if (p == 1 && opts.allow_closed_form) {
        RVector e = RVector::Unit(1, 0);
        const double l = lip.eval_sa(e);
        if (l > 1e-13) {
            est.kind = MetricEstimate::Kind::exact;
            est.value = objective(e) / l;
            Witness w;
            w.label = "extreme direction of the one-dimensional quotient";
            w.sa_coords = RVector(e / l);
            w.recorded_value = est.value;
            est.witnesses.push_back(w);
            return est;
        }
    }

    Rng rng(mix_seed(opts.seed, "rho_ln"));
    struct Cand {
        RVector z;
        double val;
    };
    std::vector<Cand> cands;

    // smart start: direction maximizing the Frobenius response
    {
        Eigen::MatrixXd gram(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = i; j < p; ++j) {
                gram(i, j) = gram(j, i) = fro_inner(diff[i], diff[j]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        RVector z = scale_to_unit_lip(lip, es.eigenvectors().col(p - 1));
        if (z.norm() > 0) cands.push_back({z, objective(z)});
    }
    for (int s = 0; s < opts.directions; ++s) {
        RVector z = scale_to_unit_lip(lip, rng.gaussian_vector(p));
        if (z.norm() > 0) cands.push_back({z, objective(z)});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.val > b.val;
    });

    double best = cands.empty() ? 0.0 : cands[0].val;
    RVector zbest = cands.empty() ? RVector::Zero(p) : cands[0].z;

    const int nstart = std::min<int>(opts.polish_starts, static_cast<int>(cands.size()));
    for (int s = 0; s < nstart; ++s) {
        RVector z = cands[s].z;
        double cur = cands[s].val;
        for (int round = 0; round < opts.alternations; ++round) {
            const CMatrix m = combine(diff, z);
            auto dec = eigh(hermitian_part(m));
            const Eigen::Index last = dec.eigenvalues.size() - 1;
            const bool top = std::abs(dec.eigenvalues(last)) >= std::abs(dec.eigenvalues(0));
            const CVector xi = dec.eigenvectors.col(top ? last : 0);
            const double sgn = top ? 1.0 : -1.0;
            RVector v(p);
            for (Eigen::Index i = 0; i < p; ++i) {
                v(i) = sgn * (xi.adjoint() * diff[i] * xi)(0).real();
            }
            LinMaxResult lm = linear_max_over_ball(lip, v, rng, opts.linmax_starts,
                                                   opts.linmax_iters);
            if (lm.z.norm() == 0.0) break;
            const double val = objective(lm.z);
            if (val > cur + 1e-14) {
                z = lm.z;
                cur = val;
            } else {
                break;
            }
        }
        if (cur > best) {
            best = cur;
            zbest = z;
        }
    }

    est.kind = MetricEstimate::Kind::lower;
    est.value = best;
    Witness w;
    w.label = "self-adjoint direction with L = 1";
    w.sa_coords = zbest;
    w.recorded_value = best;
    est.witnesses.push_back(w);
    est.params["directions"] = opts.directions;
    est.params["polish_starts"] = opts.polish_starts;
    return est;
}

// ---------------------------------------------------------------------------
// diameter

namespace {

CVector pure_state_values(const OperatorSystem& sys, const CVector& xi) {
    CVector v(sys.dim());
    for (Eigen::Index l = 0; l < sys.dim(); ++l) v(l) = (xi.adjoint() * sys.basis(l) * xi)(0);
    return v;
}

struct WidthSearch {
    double width = 0.0;
    RVector z;
    CVector top_vec, bottom_vec;
};

// maximize (λmax − λmin)(X(z)) over {L(z) ≤ 1}
WidthSearch width_search(const LipNorm& lip, Rng& rng, int directions, int rounds) {
    const OperatorSystem& sys = *lip.system();
    const Eigen::Index p = sys.hermitian_dim() - 1;
    WidthSearch best;
    if (p <= 0) return best;

    auto ambient = [&](const RVector& z) {
        CMatrix m = CMatrix::Zero(sys.ambient_dim(), sys.ambient_dim());
        for (Eigen::Index i = 0; i < p; ++i) m += z(i) * sys.sa_basis()[i + 1];
        return m;
    };
    auto width_of = [&](const RVector& z, CVector* u, CVector* w) {
        if (!u && !w) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(ambient(z), Eigen::EigenvaluesOnly);
            const auto& ev = es.eigenvalues();
            return ev(ev.size() - 1) - ev(0);
        }
        auto dec = eigh(ambient(z));
        const Eigen::Index last = dec.eigenvalues.size() - 1;
        if (u) *u = dec.eigenvectors.col(last);
        if (w) *w = dec.eigenvectors.col(0);
        return dec.eigenvalues(last) - dec.eigenvalues(0);
    };

    // stage 1: rank all seeds by raw width, polish only the best few
    struct Cand {
        RVector z;
        double width;
    };
    std::vector<Cand> cands;
    auto consider = [&](const RVector& raw) {
        RVector z = scale_to_unit_lip(lip, raw);
        if (z.norm() == 0.0) return;
        cands.push_back({z, width_of(z, nullptr, nullptr)});
    };
    for (int s = 0; s < directions; ++s) consider(rng.gaussian_vector(p));
    for (Eigen::Index i = 0; i < p; ++i) consider(RVector::Unit(p, i));
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.width > b.width; });

    const std::size_t polish = std::min<std::size_t>(4, cands.size());
    for (std::size_t s = 0; s < cands.size(); ++s) {
        RVector z = cands[s].z;
        double cur = cands[s].width;
        if (s < polish) {
            CVector u, w;
            width_of(z, &u, &w);
            for (int round = 0; round < rounds; ++round) {
                RVector v(p);
                for (Eigen::Index i = 0; i < p; ++i) {
                    const CMatrix& h = sys.sa_basis()[i + 1];
                    v(i) = ((u.adjoint() * h * u)(0) - (w.adjoint() * h * w)(0)).real();
                }
                LinMaxResult lm = linear_max_over_ball(lip, v, rng, 2, 60);
                if (lm.z.norm() == 0.0) break;
                CVector u2, w2;
                const double val = width_of(lm.z, &u2, &w2);
                if (val > cur + 1e-14) {
                    z = lm.z;
                    cur = val;
                    u = u2;
                    w = w2;
                } else {
                    break;
                }
            }
        }
        if (cur > best.width) {
            best.width = cur;
            best.z = z;
            CVector u2, w2;
            width_of(z, &u2, &w2);
            best.top_vec = u2;
            best.bottom_vec = w2;
        }
    }
    return best;
}

} // namespace

DiameterEstimate diameter(const LipNorm& lip, Eigen::Index n, const DiameterOptions& opts) {
    DiameterEstimate out;
    out.upper = lip.diameter_upper();

    Rng rng(mix_seed(opts.seed, "diameter"));
    const SystemPtr sys = lip.system();

    WidthSearch ws = width_search(lip, rng, opts.directions, opts.polish_rounds);

    MetricEstimate est;
    est.n = n;
    est.seed = opts.seed;
    est.kind = MetricEstimate::Kind::lower;

    if (ws.width == 0.0) {
        est.kind = MetricEstimate::Kind::exact; // one-point systems
        est.value = 0.0;
        out.lower = est;
        return out;
    }

    if (n == 1) {
        est.value = ws.width;
        Witness w;
        w.label = "Lip-1 direction whose spectral width is attained by a pure state pair";
        w.sa_coords = ws.z;
        w.recorded_value = ws.width;
        est.witnesses.push_back(w);
        out.lower = est;
        return out;
    }

    // level n ≥ 2: pairwise metric over a net that contains the scalar
    // embeddings of the width-achieving states
    std::vector<UcpMap> net;
    net.push_back(opsys::scalar_embedding(sys, pure_state_values(*sys, ws.top_vec), n));
    net.push_back(opsys::scalar_embedding(sys, pure_state_values(*sys, ws.bottom_vec), n));
    for (int s = 0; s < opts.net_random; ++s) {
        net.push_back(opsys::random_ucp(sys, n, mix_seed(opts.seed, 1000 + s)));
    }
    if (n <= sys->ambient_dim()) {
        for (int s = 0; s < opts.net_compressions; ++s) {
            CMatrix g = rng.ginibre(sys->ambient_dim(), n);
            Eigen::HouseholderQR<CMatrix> qr(g);
            CMatrix v = CMatrix(qr.householderQ()).leftCols(n);
            net.push_back(opsys::compression(sys, v));
        }
    }

    double best = 0.0;
    std::size_t bi = 0, bj = 1;
    RhoOptions ro = opts.rho;
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j = i + 1; j < net.size(); ++j) {
            ro.seed = mix_seed(opts.seed, 7000 + i * net.size() + j);
            const double v = rho_ln(lip, n, net[i], net[j], ro).value;
            if (v > best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    est.value = best;
    est.params["net_size"] = static_cast<double>(net.size());
    Witness w;
    w.label = "net pair " + std::to_string(bi) + "," + std::to_string(bj);
    w.recorded_value = best;
    est.witnesses.push_back(w);
    out.lower = est;
    return out;
}

// ---------------------------------------------------------------------------
// admissibility

const lip::DirectSumLip& AdmissibleLip::parts() const {
    return std::get<lip::DirectSumLip>(lip->variant());
}

namespace {

// minimize the combined Lip-norm over the free summand for a fixed element of
// the other summand; candidates carry closed-form bridge matches
struct SideMin {
    double value = 0.0;
    CVector argmin;
};

CVector bridge_candidate(const Bridge& bridge, const opsys::DirectSum& split, const CVector& cx,
                         bool from_left) {
    const OperatorSystem& xs = *split.x_sys;
    const OperatorSystem& ys = *split.y_sys;
    const Eigen::Index m_other = from_left ? ys.dim() : xs.dim();
    CVector cand = CVector::Zero(m_other);
    cand(0) = 0.0;

    if (const auto* p = std::get_if<PointBridge>(&bridge.variant)) {
        const Complex val = from_left ? (p->sigma0.transpose() * cx)(0)
                                      : (p->omega0.transpose() * cx)(0);
        cand(0) = val; // multiple of the unit matches the paired state value
        return cand;
    }
    if (std::holds_alternative<NormBridge>(bridge.variant)) {
        // least-squares transport of the ambient matrix onto the other span
        const OperatorSystem& from = from_left ? xs : ys;
        const OperatorSystem& to = from_left ? ys : xs;
        const CMatrix x = from.to_matrix(cx);
        try {
            return to.coefficients(x, 1e10); // tolerance off: plain projection
        } catch (const input_error&) {
            return cand;
        }
    }
    if (const auto* qb = std::get_if<QuotientBridge>(&bridge.variant)) {
        if (from_left) return qb->phi * cx;
        Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(qb->phi);
        return cod.solve(cx);
    }
    if (std::holds_alternative<ScalingBridge>(bridge.variant)) {
        if (from_left) {
            auto dec = eigh(hermitian_part(xs.to_matrix(cx)));
            cand(0) = 0.5 * (dec.eigenvalues(0) + dec.eigenvalues(dec.eigenvalues.size() - 1));
        } else {
            cand = CVector::Zero(xs.dim());
            cand(0) = cx(0); // μ·1_X
        }
        return cand;
    }
    return cand;
}

// Lip-norm with the named summand silenced, so the minimized objective is
// max(L_other, N) rather than being masked by the fixed summand's value.
LipNormPtr masked_sum(const AdmissibleLip& la, bool mask_left) {
    const auto& d = la.parts();
    auto zero_left = lip::make_functional_lip(d.split.x_sys, {});
    auto zero_right = lip::make_functional_lip(d.split.y_sys, {});
    return lip::make_direct_sum_lip(mask_left ? zero_left : d.left,
                                    mask_left ? d.right : zero_right, d.bridge);
}

SideMin minimize_over_side(const LipNorm& masked, const opsys::DirectSum& split,
                           const CVector& c_fixed, bool fixed_is_left, const CVector& seed_cand,
                           int iterations) {
    const OperatorSystem& other = fixed_is_left ? *split.y_sys : *split.x_sys;
    const Eigen::Index m = other.dim();

    auto pair_coeff = [&](const CVector& c_other) {
        return fixed_is_left ? split.pair_to_sum(c_fixed, c_other)
                             : split.pair_to_sum(c_other, c_fixed);
    };
    const CMatrix& emb_cols = split.embed;
    const Eigen::Index mx = split.x_sys->dim();
    CMatrix jac = fixed_is_left ? emb_cols.rightCols(other.dim())
                                : emb_cols.leftCols(mx);

    auto objective = [&](const RVector& zr, RVector& g) {
        CVector c(m);
        for (Eigen::Index i = 0; i < m; ++i) c(i) = Complex(zr(i), zr(i + m));
        CVector gs;
        const double val = masked.eval_with_grad(pair_coeff(c), gs);
        CVector gc = jac.adjoint() * gs;
        g.resize(2 * m);
        for (Eigen::Index i = 0; i < m; ++i) {
            g(i) = gc(i).real();
            g(i + m) = gc(i).imag();
        }
        return val;
    };

    RVector z0(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z0(i) = seed_cand(i).real();
        z0(i + m) = seed_cand(i).imag();
    }
    auto res = lip::minimize_subgradient(objective, z0, iterations, 1e-9);
    SideMin sm;
    sm.value = res.value;
    sm.argmin.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) sm.argmin(i) = Complex(res.argmin(i), res.argmin(i + m));
    return sm;
}

} // namespace

AdmissibleLip certify_admissible(LipNormPtr direct_sum_lip, std::uint64_t seed,
                                 int samples_per_side, double tol) {
    AdmissibleLip la;
    la.lip = std::move(direct_sum_lip);
    if (!std::holds_alternative<lip::DirectSumLip>(la.lip->variant())) {
        throw input_error("certify_admissible: Lip-norm is not a direct sum");
    }
    const auto& d = la.parts();
    Rng rng(mix_seed(seed, "admissible"));

    auto masked_l = masked_sum(la, true);  // objective max(L_Y, N), x fixed
    auto masked_r = masked_sum(la, false); // objective max(L_X, N), y fixed

    double worst = 0.0;
    auto run_side = [&](bool from_left) {
        const OperatorSystem& fixed_sys = from_left ? *d.split.x_sys : *d.split.y_sys;
        const LipNorm& fixed_lip = from_left ? *d.left : *d.right;
        const Eigen::Index h = fixed_sys.hermitian_dim();
        for (int s = 0; s < samples_per_side; ++s) {
            RVector z = rng.gaussian_vector(h - 1);
            if (h <= 1) break;
            CVector c = CVector::Zero(fixed_sys.dim());
            for (Eigen::Index i = 1; i < h; ++i) {
                c += z(i - 1) * fixed_sys.sa_basis_coeffs()[i];
            }
            const double lfixed = fixed_lip.eval(c).value;
            if (lfixed < 1e-12) continue;
            c /= lfixed;
            CVector cand = bridge_candidate(d.bridge, d.split, c, from_left);
            SideMin sm = minimize_over_side(from_left ? *masked_l : *masked_r, d.split, c,
                                            from_left, cand, 2000);
            worst = std::max(worst, sm.value - 1.0); // L_fixed(c) = 1 after scaling
        }
    };
    run_side(true);
    run_side(false);

    la.worst_defect = worst;
    la.certified = worst <= tol;
    if (!la.certified) {
        la.detail = "induced quotient exceeds the summand Lip-norm by " + std::to_string(worst);
    }
    return la;
}

// ---------------------------------------------------------------------------
// bridge validation

BridgeReport validate_bridge(const Bridge& bridge, const LipNormPtr& lip_x,
                             const LipNormPtr& lip_y, const std::vector<double>& delta_grid,
                             std::uint64_t seed, int samples) {
    BridgeReport rep;
    auto sum = lip::make_direct_sum_lip(lip_x, lip_y, bridge);
    AdmissibleLip la;
    la.lip = sum;
    const auto& d = la.parts();

    // condition (i)
    CVector ux = CVector::Zero(d.split.x_sys->dim());
    ux(0) = 1.0;
    CVector uy = CVector::Zero(d.split.y_sys->dim());
    uy(0) = 1.0;
    const double n11 = bridge.eval(*d.split.x_sys, ux, *d.split.y_sys, uy);
    const double n10 = bridge.eval(*d.split.x_sys, ux, *d.split.y_sys, CVector::Zero(uy.size()));
    rep.condition_i = n11 <= 1e-10 && n10 > 1e-10;
    if (!rep.condition_i) rep.detail += "condition (i) failed; ";

    // condition (ii), sampled both ways
    Rng rng(mix_seed(seed, "bridge"));
    auto masked_l = masked_sum(la, true);
    auto masked_r = masked_sum(la, false);
    double worst = 0.0;
    RVector worst_z;

    auto run_side = [&](bool from_left) {
        const OperatorSystem& fixed_sys = from_left ? *d.split.x_sys : *d.split.y_sys;
        const LipNorm& fixed_lip = from_left ? *lip_x : *lip_y;
        const Eigen::Index h = fixed_sys.hermitian_dim();
        if (h <= 1) return;
        for (int s = 0; s < samples; ++s) {
            RVector z = rng.gaussian_vector(h - 1);
            CVector c = CVector::Zero(fixed_sys.dim());
            for (Eigen::Index i = 1; i < h; ++i) {
                c += z(i - 1) * fixed_sys.sa_basis_coeffs()[i];
            }
            const double lfixed = fixed_lip.eval(c).value;
            if (lfixed < 1e-12) continue;
            c /= lfixed;
            CVector cand = bridge_candidate(bridge, d.split, c, from_left);
            SideMin sm = minimize_over_side(from_left ? *masked_l : *masked_r, d.split, c,
                                            from_left, cand, 2000);
            const double gap = sm.value - 1.0;
            if (gap > worst) {
                worst = gap;
                worst_z = z;
            }
        }
    };
    run_side(true);
    run_side(false);

    rep.worst_gap = worst;
    rep.worst_witness = worst_z;
    const double delta = delta_grid.empty() ? 0.05 : *std::min_element(delta_grid.begin(),
                                                                       delta_grid.end());
    rep.ok = rep.condition_i && worst <= delta;
    if (worst > delta) rep.detail += "condition (ii) gap " + std::to_string(worst) + "; ";
    return rep;
}

// ---------------------------------------------------------------------------
// embeddings and matching

UcpMap embed_left(const AdmissibleLip& la, const UcpMap& phi) {
    const auto& d = la.parts();
    if (!phi.system->same_as(*d.split.x_sys)) {
        throw input_error("embed_left: map does not live on the left summand");
    }
    UcpMap out;
    out.system = d.split.sum;
    out.n = phi.n;
    out.images.reserve(d.split.sum->dim());
    for (Eigen::Index l = 0; l < d.split.sum->dim(); ++l) {
        out.images.push_back(phi.apply(CVector(d.split.project_x.col(l))));
    }
    return out;
}

UcpMap embed_right(const AdmissibleLip& la, const UcpMap& psi) {
    const auto& d = la.parts();
    if (!psi.system->same_as(*d.split.y_sys)) {
        throw input_error("embed_right: map does not live on the right summand");
    }
    UcpMap out;
    out.system = d.split.sum;
    out.n = psi.n;
    out.images.reserve(d.split.sum->dim());
    for (Eigen::Index l = 0; l < d.split.sum->dim(); ++l) {
        out.images.push_back(psi.apply(CVector(d.split.project_y.col(l))));
    }
    return out;
}

namespace {

// test directions in the sum quotient, scaled to L = 1
std::vector<std::pair<CVector, CVector>> sum_test_directions(const AdmissibleLip& la, int count,
                                                             Rng& rng) {
    const auto& d = la.parts();
    const OperatorSystem& sum = *d.split.sum;
    const Eigen::Index h = sum.hermitian_dim();
    std::vector<std::pair<CVector, CVector>> out;
    for (int s = 0; s < count && h > 1; ++s) {
        RVector z = rng.gaussian_vector(h - 1);
        CVector c = CVector::Zero(sum.dim());
        for (Eigen::Index i = 1; i < h; ++i) c += z(i - 1) * sum.sa_basis_coeffs()[i];
        const double l = la.lip->eval(c).value;
        if (l < 1e-12) continue;
        c /= l;
        out.emplace_back(d.split.sum_to_x(c), d.split.sum_to_y(c));
    }
    return out;
}

CMatrix choi_of_ucp_on_full(const UcpMap& phi) {
    // Choi matrix Σ_ab e_ab ⊗ φ(e_ab) for a map on a full matrix algebra
    const Eigen::Index k = phi.system->ambient_dim();
    const Eigen::Index n = phi.n;
    CMatrix c = CMatrix::Zero(k * n, k * n);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            CMatrix e = CMatrix::Zero(k, k);
            e(a, b) = 1.0;
            c.block(a * n, b * n, n, n) = phi.apply(phi.system->coefficients(e));
        }
    }
    return c;
}

// u.c.p. map on target_sys from a Choi matrix over the target's ambient
UcpMap ucp_from_choi(const SystemPtr& target_sys, Eigen::Index n, const CMatrix& choi) {
    UcpMap psi;
    psi.system = target_sys;
    psi.n = n;
    const Eigen::Index k = target_sys->ambient_dim();
    psi.images.reserve(target_sys->dim());
    for (Eigen::Index l = 0; l < target_sys->dim(); ++l) {
        const CMatrix& b = target_sys->basis(l);
        CMatrix im = CMatrix::Zero(n, n);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index c2 = 0; c2 < k; ++c2) {
                if (b(a, c2) != Complex(0.0, 0.0)) {
                    im += b(a, c2) * choi.block(a * n, c2 * n, n, n);
                }
            }
        }
        psi.images.push_back(im);
    }
    psi.images[0] = CMatrix::Identity(n, n);
    return psi;
}

void project_choi_feasible(CMatrix& choi, Eigen::Index k, Eigen::Index n, int sweeps = 6) {
    for (int it = 0; it < sweeps; ++it) {
        // affine part: Σ_a C[a][a] = I has the closed-form projection
        CMatrix s = CMatrix::Zero(n, n);
        for (Eigen::Index a = 0; a < k; ++a) s += choi.block(a * n, a * n, n, n);
        const CMatrix corr = (s - CMatrix::Identity(n, n)) / double(k);
        for (Eigen::Index a = 0; a < k; ++a) choi.block(a * n, a * n, n, n) -= corr;
        // psd part
        auto dec = eigh(hermitian_part(choi));
        RVector clipped = dec.eigenvalues.cwiseMax(0.0);
        choi = dec.eigenvectors * clipped.asDiagonal() * dec.eigenvectors.adjoint();
    }
    // exact unitalization
    CMatrix s = CMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < k; ++a) s += choi.block(a * n, a * n, n, n);
    if (min_eigenvalue(s) > 1e-10) {
        const CMatrix r = psd_inv_sqrt(hermitian_part(s), 1e-11);
        choi = kron(CMatrix::Identity(k, k), r) * choi * kron(CMatrix::Identity(k, k), r);
    }
}

} // namespace

MatchResult match_ucp(const AdmissibleLip& la, const UcpMap& phi, bool from_left,
                      const MatchOptions& opts) {
    const auto& d = la.parts();
    const SystemPtr target_sys = from_left ? d.split.y_sys : d.split.x_sys;
    const Eigen::Index n = phi.n;
    const Eigen::Index kt = target_sys->ambient_dim();

    Rng rng(mix_seed(opts.seed, "match_ucp"));
    auto tests = sum_test_directions(la, opts.test_directions, rng);

    auto objective_for = [&](const UcpMap& psi) {
        double worst = 0.0;
        for (const auto& [cx, cy] : tests) {
            const CVector& cphi = from_left ? cx : cy;
            const CVector& cpsi = from_left ? cy : cx;
            worst = std::max(worst,
                             operator_norm(CMatrix(phi.apply(cphi) - psi.apply(cpsi))));
        }
        return worst;
    };

    // candidate pool: random maps, scalar embeddings, and the Arveson-style
    // transport when the summands share an ambient algebra
    std::vector<UcpMap> pool;
    for (int s = 0; s < opts.net_size; ++s) {
        pool.push_back(opsys::random_ucp(target_sys, n, mix_seed(opts.seed, 400 + s)));
    }
    pool.push_back(opsys::scalar_embedding(target_sys, opsys::tracial_state_values(*target_sys),
                                           n));
    const SystemPtr source_sys = from_left ? d.split.x_sys : d.split.y_sys;
    if (source_sys->ambient_dim() == target_sys->ambient_dim()) {
        auto ext = opsys::extend_to_ambient(phi, 1e-6, 3000);
        UcpMap transported;
        transported.system = target_sys;
        transported.n = n;
        transported.images.reserve(target_sys->dim());
        for (Eigen::Index l = 0; l < target_sys->dim(); ++l) {
            transported.images.push_back(ext.extension.apply_matrix(target_sys->basis(l)));
        }
        transported.images[0] = CMatrix::Identity(n, n);
        pool.push_back(std::move(transported));
    }

    double best = std::numeric_limits<double>::infinity();
    UcpMap best_map;
    for (const auto& cand : pool) {
        const double v = objective_for(cand);
        if (v < best) {
            best = v;
            best_map = cand;
        }
    }

    // Choi-parametrized subgradient descent from the best candidate
    CMatrix choi = choi_of_ucp_on_full(
        [&] {
            // extend best_map to the full target algebra so the Choi
            // parametrization covers all of UCP_n
            auto ext = opsys::extend_to_ambient(best_map, 1e-6, 2000);
            return ext.extension;
        }());
    double step = 0.25;
    UcpMap cur = best_map;
    double cur_val = best;
    for (int it = 0; it < opts.descent_iterations; ++it) {
        // worst test direction and its spectral subgradient
        double worst = 0.0;
        CVector worst_psi_coeff;
        CMatrix worst_m;
        for (const auto& [cx, cy] : tests) {
            const CVector& cphi = from_left ? cx : cy;
            const CVector& cpsi = from_left ? cy : cx;
            CMatrix m = phi.apply(cphi) - cur.apply(cpsi);
            const double v = operator_norm(m);
            if (v > worst) {
                worst = v;
                worst_psi_coeff = cpsi;
                worst_m = m;
            }
        }
        if (worst < 1e-12) break;
        auto dec = eigh(hermitian_part(worst_m));
        const Eigen::Index last = dec.eigenvalues.size() - 1;
        const bool top = std::abs(dec.eigenvalues(last)) >= std::abs(dec.eigenvalues(0));
        const CVector xi = dec.eigenvectors.col(top ? last : 0);
        const double sgn = top ? 1.0 : -1.0;
        // gradient of −sgn·⟨ξ, ψ(y*)ξ⟩ w.r.t. the Choi matrix
        const CMatrix y = target_sys->to_matrix(worst_psi_coeff);
        CMatrix g = CMatrix::Zero(kt * n, kt * n);
        const CMatrix rank1 = xi * xi.adjoint();
        for (Eigen::Index a = 0; a < kt; ++a) {
            for (Eigen::Index b = 0; b < kt; ++b) {
                if (y(a, b) != Complex(0.0, 0.0)) {
                    g.block(a * n, b * n, n, n) -= sgn * std::conj(y(a, b)) * rank1;
                }
            }
        }
        g = hermitian_part(g);
        const double gn = g.norm();
        if (gn < 1e-13) break;
        CMatrix trial = choi - (step / gn) * g;
        project_choi_feasible(trial, kt, n);
        UcpMap cand = ucp_from_choi(target_sys, n, trial);
        const double v = objective_for(cand);
        if (v < cur_val) {
            cur_val = v;
            cur = cand;
            choi = trial;
        } else {
            step *= 0.7;
            if (step < 1e-8) break;
        }
    }
    // select by the full metric, not the sampled proxy
    MatchResult res;
    RhoOptions ro = opts.rho;
    ro.seed = mix_seed(opts.seed, "match_rho");
    const UcpMap a = from_left ? embed_left(la, phi) : embed_right(la, phi);
    auto full_rho = [&](const UcpMap& m) {
        const UcpMap b = from_left ? embed_right(la, m) : embed_left(la, m);
        return rho_ln(*la.lip, n, a, b, ro);
    };
    MetricEstimate rho_pool = full_rho(best_map);
    MetricEstimate rho_descent = full_rho(cur);
    if (rho_descent.value < rho_pool.value) {
        res.match = cur;
        res.rho_est = rho_descent;
    } else {
        res.match = best_map;
        res.rho_est = rho_pool;
    }
    return res;
}

MetricEstimate hausdorff_ucp(const AdmissibleLip& la, Eigen::Index n,
                             const HausdorffOptions& opts) {
    if (!la.certified) {
        throw input_error("hausdorff_ucp: admissibility certificate missing");
    }
    const auto& d = la.parts();
    Rng rng(mix_seed(opts.seed, "hausdorff"));

    auto side_net = [&](const SystemPtr& sys, std::uint64_t label) {
        std::vector<UcpMap> net;
        for (int s = 0; s < opts.net_size; ++s) {
            net.push_back(opsys::random_ucp(sys, n, mix_seed(opts.seed, label + s)));
        }
        net.push_back(opsys::scalar_embedding(sys, opsys::tracial_state_values(*sys), n));
        if (n <= sys->ambient_dim()) {
            CMatrix g = rng.ginibre(sys->ambient_dim(), n);
            Eigen::HouseholderQR<CMatrix> qr(g);
            net.push_back(opsys::compression(sys, CMatrix(qr.householderQ()).leftCols(n)));
        }
        return net;
    };
    auto net_x = side_net(d.split.x_sys, 11000);
    auto net_y = side_net(d.split.y_sys, 22000);

    MatchOptions mo = opts.match;
    double sup = 0.0;
    for (std::size_t i = 0; i < net_x.size(); ++i) {
        mo.seed = mix_seed(opts.seed, 31000 + i);
        auto mr = match_ucp(la, net_x[i], true, mo);
        sup = std::max(sup, mr.rho_est.value);
    }
    for (std::size_t j = 0; j < net_y.size(); ++j) {
        mo.seed = mix_seed(opts.seed, 32000 + j);
        auto mr = match_ucp(la, net_y[j], false, mo);
        sup = std::max(sup, mr.rho_est.value);
    }

    MetricEstimate est;
    est.kind = MetricEstimate::Kind::heuristic;
    est.n = n;
    est.seed = opts.seed;
    est.value = sup;
    est.params["net_x"] = static_cast<double>(net_x.size());
    est.params["net_y"] = static_cast<double>(net_y.size());
    return est;
}

MetricEstimate dist_upper(const LipNormPtr& lip_x, const LipNormPtr& lip_y, const Bridge& bridge,
                          const DistUpperOptions& opts) {
    BridgeReport rep = validate_bridge(bridge, lip_x, lip_y, opts.delta_grid, opts.seed,
                                       opts.bridge_samples);
    if (!rep.ok) {
        throw validation_error("dist_upper: bridge failed validation (" + rep.detail + ")");
    }

    MetricEstimate est;
    est.seed = opts.seed;
    if (bridge.uniform_bound) {
        est.kind = MetricEstimate::Kind::upper;
        est.value = *bridge.uniform_bound;
        est.n = 0; // uniform over all levels
        est.params["analytic"] = 1.0;
        return est;
    }

    auto sum = lip::make_direct_sum_lip(lip_x, lip_y, bridge);
    AdmissibleLip la = certify_admissible(sum, opts.seed);
    if (!la.certified) {
        throw validation_error("dist_upper: direct-sum Lip-norm failed admissibility");
    }
    double worst = 0.0;
    for (Eigen::Index n = 1; n <= opts.n_max; ++n) {
        HausdorffOptions ho = opts.hausdorff;
        ho.seed = mix_seed(opts.seed, 500 + n);
        worst = std::max(worst, hausdorff_ucp(la, n, ho).value);
    }
    est.kind = MetricEstimate::Kind::heuristic;
    est.value = worst;
    est.n = opts.n_max;
    return est;
}

// ---------------------------------------------------------------------------
// fiber neighborhoods

namespace {

// upper bracket of L^e for the direct-sum pair (x_entry, z_entry)
double pair_le_upper(const LipNorm& sum_lip, const opsys::DirectSum& split, const CVector& cx,
                     const CVector& cz) {
    const CVector pair = split.pair_to_sum(cx, cz);
    return sum_lip.eval_e(pair).upper;
}

// minimize the pair L^e upper bracket over z for one entry
CVector fiber_center(const LipNorm& sum_lip, const opsys::DirectSum& split, const CVector& cx,
                     const CVector& seed_cand) {
    const OperatorSystem& ys = *split.y_sys;
    const Eigen::Index m = ys.dim();
    const OperatorSystem& sum_sys = *split.sum;

    auto objective = [&](const RVector& zr, RVector& g) {
        CVector cz(m);
        for (Eigen::Index i = 0; i < m; ++i) cz(i) = Complex(zr(i), zr(i + m));
        const CVector pair = split.pair_to_sum(cx, cz);
        const CVector adj = sum_sys.adjoint_map() * pair.conjugate();
        const CVector re = 0.5 * (pair + adj);
        const CVector im = (pair - adj) / Complex(0.0, 2.0);
        CVector gre, gim;
        const double v = sum_lip.eval_with_grad(re, gre) + sum_lip.eval_with_grad(im, gim);
        // chain: d(pair)/d(cz) = embed Y-columns; d(re)/d(pair) mixes the adjoint
        const CMatrix jac = split.embed.rightCols(m);
        const CMatrix adjmap = sum_sys.adjoint_map();
        // re = (p + A conj(p))/2, im = (p − A conj(p))/(2i) with p = jac·cz
        CVector gp = 0.5 * (gre + Complex(0.0, 1.0) * gim); // ∂/∂p part
        CVector gq = 0.5 * (adjmap.adjoint() * (gre - Complex(0.0, 1.0) * gim)); // conj part
        CVector gcz = jac.adjoint() * gp + (jac.adjoint() * gq).conjugate();
        g.resize(2 * m);
        for (Eigen::Index i = 0; i < m; ++i) {
            g(i) = gcz(i).real();
            g(i + m) = gcz(i).imag();
        }
        return v;
    };

    RVector z0(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z0(i) = seed_cand(i).real();
        z0(i + m) = seed_cand(i).imag();
    }
    auto res = lip::minimize_subgradient(objective, z0, 3000, 1e-9);
    CVector out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = Complex(res.argmin(i), res.argmin(i + m));
    return out;
}

} // namespace

NeighborhoodReport check_diambound(const AdmissibleLip& la, Eigen::Index n,
                                   const BlockElement& x, const BlockElement& x_prime,
                                   double lambda, double r, const NeighborhoodOptions& opts) {
    NeighborhoodReport rep;
    const auto& d = la.parts();
    const OperatorSystem& xs = *d.split.x_sys;
    const OperatorSystem& ys = *d.split.y_sys;
    const double n4 = std::pow(static_cast<double>(n), 4);

    // λ must exceed twice the matrix seminorm of the anchor
    {
        double lnx = 0.0;
        for (const CVector& c : x.entries) {
            lnx = std::max(lnx, d.left->eval_e(c).upper);
        }
        if (!(lambda > 2.0 * lnx)) {
            throw input_error("check_diambound: lambda must exceed twice L^n(x)");
        }
    }

    Rng rng(mix_seed(opts.seed, "diambound"));

    auto sample_fiber = [&](const BlockElement& anchor, int count) {
        std::vector<BlockElement> out;
        // central point: per-entry minimization seeded by the bridge candidate
        BlockElement center;
        center.n = n;
        center.entries.resize(n * n, CVector::Zero(ys.dim()));
        for (Eigen::Index t = 0; t < n * n; ++t) {
            const CVector cand = bridge_candidate(d.bridge, d.split, anchor.entries[t], true);
            center.entries[t] = fiber_center(*la.lip, d.split, anchor.entries[t], cand);
        }
        auto membership = [&](const BlockElement& z) {
            double worst = 0.0;
            for (Eigen::Index t = 0; t < n * n; ++t) {
                worst = std::max(worst,
                                 pair_le_upper(*la.lip, d.split, anchor.entries[t], z.entries[t]));
            }
            return worst;
        };
        if (membership(center) <= lambda * (1.0 + 1e-9)) out.push_back(center);
        for (int s = 0; s < count; ++s) {
            BlockElement dir;
            dir.n = n;
            dir.entries.resize(n * n, CVector::Zero(ys.dim()));
            for (Eigen::Index t = 0; t < n * n; ++t) {
                for (Eigen::Index i = 0; i < ys.dim(); ++i) {
                    dir.entries[t](i) = rng.gaussian_complex();
                }
            }
            // push to the boundary by bisection on the step
            double lo = 0.0, hi = 1.0;
            auto probe = [&](double t) {
                BlockElement z = center;
                for (Eigen::Index e = 0; e < n * n; ++e) z.entries[e] += t * dir.entries[e];
                return z;
            };
            while (membership(probe(hi)) <= lambda && hi < 1e4) hi *= 2.0;
            for (int b = 0; b < 30; ++b) {
                const double mid = 0.5 * (lo + hi);
                if (membership(probe(mid)) <= lambda) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if (lo > 0.0) out.push_back(probe(lo * 0.999));
        }
        return out;
    };

    auto witnesses_x = sample_fiber(x, opts.witnesses);
    auto witnesses_xp = sample_fiber(x_prime, opts.witnesses);
    rep.witnesses_found = static_cast<int>(witnesses_x.size() + witnesses_xp.size());
    if (witnesses_x.empty() || witnesses_xp.empty()) {
        rep.detail = "fiber search found no members";
        return rep;
    }
    rep.conclusive = true;

    const CMatrix xm = x.to_matrix(xs);
    const CMatrix xpm = x_prime.to_matrix(xs);
    const double norm_x = operator_norm(xm);

    // (ii): self-adjoint members obey ‖z‖ ≤ ‖x‖ + 2λn⁴r
    rep.norm_bound = norm_x + 2.0 * lambda * n4 * r;
    bool x_sa = x.is_hermitian(xs);
    std::vector<BlockElement> sa_wit;
    for (const auto& z : witnesses_x) {
        BlockElement zs = z;
        BlockElement adj = z.adjoint(ys);
        for (Eigen::Index t = 0; t < n * n; ++t) {
            zs.entries[t] = 0.5 * (z.entries[t] + adj.entries[t]);
        }
        double member = 0.0;
        for (Eigen::Index t = 0; t < n * n; ++t) {
            member = std::max(member,
                              pair_le_upper(*la.lip, d.split, x.entries[t], zs.entries[t]));
        }
        if (member <= lambda * (1.0 + 1e-6)) sa_wit.push_back(zs);
    }
    if (x_sa) {
        for (const auto& z : sa_wit) {
            rep.worst_norm = std::max(rep.worst_norm, operator_norm(z.to_matrix(ys)));
        }
    }

    // (iii): sampled diameter ≤ 8λn⁴r
    rep.diameter_bound = 8.0 * lambda * n4 * r;
    for (std::size_t i = 0; i < witnesses_x.size(); ++i) {
        for (std::size_t j = i + 1; j < witnesses_x.size(); ++j) {
            rep.sampled_diameter =
                std::max(rep.sampled_diameter,
                         operator_norm(CMatrix(witnesses_x[i].to_matrix(ys) -
                                               witnesses_x[j].to_matrix(ys))));
        }
    }

    // (iv): sampled cross distance ≤ 8λn⁴r + 4‖x − x'‖
    rep.cross_bound = rep.diameter_bound + 4.0 * operator_norm(CMatrix(xm - xpm));
    for (const auto& zi : witnesses_x) {
        double closest = std::numeric_limits<double>::infinity();
        for (const auto& zj : witnesses_xp) {
            closest = std::min(closest, operator_norm(CMatrix(zi.to_matrix(ys) -
                                                              zj.to_matrix(ys))));
        }
        rep.sampled_cross = std::max(rep.sampled_cross, closest);
    }

    // (v): near-positivity of self-adjoint members when x ≥ 0
    rep.positivity_floor = -2.0 * lambda * n4 * r;
    if (x_sa && min_eigenvalue(xm) >= -psd_tolerance(xm) && !sa_wit.empty()) {
        rep.worst_min_eig = std::numeric_limits<double>::infinity();
        for (const auto& z : sa_wit) {
            rep.worst_min_eig = std::min(rep.worst_min_eig, min_eigenvalue(z.to_matrix(ys)));
        }
    }

    bool ok = true;
    if (x_sa && !sa_wit.empty() && rep.worst_norm > rep.norm_bound + opts.slack) ok = false;
    if (rep.sampled_diameter > rep.diameter_bound + opts.slack) ok = false;
    if (rep.sampled_cross > rep.cross_bound + opts.slack) ok = false;
    if (x_sa && std::isfinite(rep.worst_min_eig) &&
        rep.worst_min_eig < rep.positivity_floor - opts.slack) {
        ok = false;
    }
    rep.ok = ok;
    return rep;
}

} // namespace cqms::metrics
