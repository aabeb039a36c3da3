#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cqms/lipnorm.hpp"

using namespace cqms;
using namespace cqms::lip;

namespace {

constexpr double pi = std::numbers::pi;

// Gauge rotations diag(1, e^{2πit}) on M_2 with length |angle|; with
// both_axes, x-axis rotations join the sample so it separates the diagonal.
LipNormPtr rotation_lip(opsys::SystemPtr sys, const std::vector<double>& ts,
                        bool both_axes = false) {
    std::vector<Automorphism> autos;
    std::vector<double> lengths;
    for (double t : ts) {
        Automorphism g;
        g.kind = Automorphism::Kind::unitary_conjugation;
        CMatrix u = CMatrix::Identity(2, 2);
        u(1, 1) = std::polar(1.0, 2.0 * pi * t);
        g.matrix = u;
        autos.push_back(g);
        lengths.push_back(2.0 * pi * std::min(t, 1.0 - t));
        if (both_axes) {
            const double th = 2.0 * pi * std::min(t, 1.0 - t);
            Automorphism gx;
            gx.kind = Automorphism::Kind::unitary_conjugation;
            CMatrix ux(2, 2);
            ux << std::cos(th / 2), Complex(0.0, -std::sin(th / 2)),
                Complex(0.0, -std::sin(th / 2)), std::cos(th / 2);
            gx.matrix = ux;
            autos.push_back(gx);
            lengths.push_back(th);
        }
    }
    return make_action_lip(std::move(sys), std::move(autos), std::move(lengths));
}

} // namespace

TEST_CASE("two-point functional Lip-norm evaluates hand values") {
    TwoPoint tp = make_two_point(2.0);
    // diag(1,0): coefficients (1, -1) in basis {1, e22}
    CVector c(2);
    c << 1.0, -1.0;
    CHECK(tp.lip->eval(c).value == doctest::Approx(0.5).epsilon(1e-12));

    CVector unit(2);
    unit << 1.0, 0.0;
    CHECK(tp.lip->eval(unit).value == doctest::Approx(0.0));
}

TEST_CASE("unit has zero seminorm in every variant") {
    TwoPoint tp = make_two_point(1.0);
    auto scaled = make_scaled_lip(tp.lip, 3.0);
    auto ds = make_direct_sum_lip(tp.lip, tp.lip, metrics::make_norm_bridge(0.5));

    CVector unit2 = CVector::Zero(2);
    unit2(0) = 1.0;
    CHECK(tp.lip->eval(unit2).value == doctest::Approx(0.0));
    CHECK(scaled->eval(unit2).value == doctest::Approx(0.0));

    CVector unit_sum = CVector::Zero(ds->system()->dim());
    unit_sum(0) = 1.0;
    CHECK(ds->eval(unit_sum).value == doctest::Approx(0.0));

    auto rot = rotation_lip(opsys::full_matrix_system(2), {0.125, 0.25, 0.375});
    CVector unit4 = CVector::Zero(4);
    unit4(0) = 1.0;
    CHECK(rot->eval(unit4).value == doctest::Approx(0.0));
}

TEST_CASE("action Lip-norm matches the closed form per sample") {
    auto sys = opsys::full_matrix_system(2);
    std::vector<double> ts{0.125, 0.25, 0.375};
    auto lip = rotation_lip(sys, ts);

    CMatrix e01 = CMatrix::Zero(2, 2);
    e01(0, 1) = 1.0;
    double expected = 0.0;
    for (double t : ts) {
        expected = std::max(expected, std::abs(std::polar(1.0, 2.0 * pi * t) - 1.0) /
                                          (2.0 * pi * std::min(t, 1.0 - t)));
    }
    CHECK(lip->eval(sys->coefficients(e01)).value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("scaled Lip-norm doubles values") {
    TwoPoint tp = make_two_point(1.0);
    auto scaled = make_scaled_lip(tp.lip, 2.0);
    CVector c(2);
    c << 0.3, 1.7;
    CHECK(scaled->eval(c).value == doctest::Approx(2.0 * tp.lip->eval(c).value).epsilon(1e-12));
}

TEST_CASE("quotient Lip-norm solves the fiber minimization") {
    // parent: diag(a,b,c) with L = max(|a−b|, |b−c|); child: diag(a,c)
    auto parent_sys = opsys::diagonal_system(3);
    std::vector<std::vector<CMatrix>> maps(2);
    auto one = [](double v) {
        CMatrix m(1, 1);
        m(0, 0) = v;
        return m;
    };
    maps[0] = {one(0.0), one(-1.0), one(0.0)}; // a−b = −c1
    maps[1] = {one(0.0), one(1.0), one(-1.0)}; // b−c = c1 − c2
    auto parent = make_functional_lip(parent_sys, maps);

    auto child_sys = opsys::diagonal_system(2);
    CMatrix phi = CMatrix::Zero(2, 3);
    phi(0, 0) = 1.0;
    phi(1, 2) = 1.0;
    auto quot = make_quotient_lip(child_sys, parent, phi);

    CVector c(2); // diag(1, 0): c = (1, −1)
    c << 1.0, -1.0;
    auto v = quot->eval(c);
    CHECK(v.value == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(v.kind == SeminormValue::Kind::bracketed);

    // Lip-norm-decreasing against the parent on random elements
    Rng rng(3);
    for (int s = 0; s < 10; ++s) {
        CVector cp(3);
        for (int l = 0; l < 3; ++l) cp(l) = rng.gaussian_complex();
        const double lp = parent->eval(cp).value;
        const double lq = quot->eval(CVector(phi * cp)).value;
        CHECK(lq <= lp + 1e-6);
    }
}

TEST_CASE("direct sum induces its summands within tolerance on candidates") {
    TwoPoint tp = make_two_point(1.0);
    auto ds = make_direct_sum_lip(tp.lip, tp.lip, metrics::make_norm_bridge(0.25));
    const auto& d = std::get<DirectSumLip>(ds->variant());

    Rng rng(4);
    for (int s = 0; s < 10; ++s) {
        CVector cx(2);
        cx << rng.gaussian_complex(), rng.gaussian_complex();
        // candidate y = x makes the bridge term vanish, so L(x,x) = L_X(x)
        CVector cs = d.split.pair_to_sum(cx, cx);
        CHECK(ds->eval(cs).value == doctest::Approx(tp.lip->eval(cx).value).epsilon(1e-9));
    }
}

TEST_CASE("extended seminorm brackets") {
    TwoPoint tp = make_two_point(1.0);

    // self-adjoint: exact
    CVector c(2);
    c << 0.0, 1.0;
    auto v = tp.lip->eval_e(c);
    CHECK(v.kind == SeminormValue::Kind::exact);
    CHECK(v.value == doctest::Approx(tp.lip->eval(c).value));

    // i·h: bracket collapses to L(h)
    CVector ih = Complex(0.0, 1.0) * c;
    auto vi = tp.lip->eval_e(ih);
    CHECK(vi.lower == doctest::Approx(vi.upper).epsilon(1e-12));
    CHECK(vi.upper == doctest::Approx(tp.lip->eval(c).value).epsilon(1e-12));

    // random non-normal elements on a 2×2 action system: lower ≤ upper, finite
    auto sys = opsys::full_matrix_system(2);
    auto rot = rotation_lip(sys, {0.125, 0.25, 0.375});
    Rng rng(8);
    for (int s = 0; s < 10; ++s) {
        CVector x(4);
        for (int l = 0; l < 4; ++l) x(l) = rng.gaussian_complex();
        Rng refine(100 + s);
        auto ve = rot->eval_e(x, &refine, 32);
        CHECK(ve.lower <= ve.upper + 1e-12);
        CHECK(std::isfinite(ve.upper));
        // closed-form ends
        const CVector adj = sys->adjoint_map() * x.conjugate();
        const CVector re = 0.5 * (x + adj);
        const CVector im = (x - adj) / Complex(0.0, 2.0);
        const double lre = rot->eval(re).value;
        const double lim = rot->eval(im).value;
        CHECK(ve.lower >= std::max(lre, lim) - 1e-12);
        CHECK(ve.upper == doctest::Approx(lre + lim).epsilon(1e-12));
    }
}

TEST_CASE("matrix seminorm is the entrywise max") {
    auto sys = opsys::full_matrix_system(2);
    auto rot = rotation_lip(sys, {0.125, 0.25});
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 1) = 1.0;
    h(1, 0) = 1.0;
    const double lh = rot->eval(sys->coefficients(h)).value;

    opsys::BlockElement x;
    x.n = 2;
    x.entries.assign(4, CVector::Zero(4));
    x.entry(0, 0) = sys->coefficients(h);
    CHECK(rot->eval_n(x).value == doctest::Approx(lh).epsilon(1e-12));

    // 1 ⊗ h
    opsys::BlockElement y;
    y.n = 2;
    y.entries.assign(4, CVector::Zero(4));
    y.entry(0, 0) = sys->coefficients(h);
    y.entry(1, 1) = sys->coefficients(h);
    CHECK(rot->eval_n(y).value == doctest::Approx(lh).epsilon(1e-12));

    // random block element dominates each entry
    Rng rng(12);
    opsys::BlockElement z;
    z.n = 2;
    z.entries.assign(4, CVector::Zero(4));
    for (auto& e : z.entries) {
        for (int l = 0; l < 4; ++l) e(l) = rng.gaussian_complex();
    }
    auto vn = rot->eval_n(z);
    for (const auto& e : z.entries) {
        CHECK(vn.upper >= rot->eval_e(e).lower - 1e-12);
    }
}

TEST_CASE("validation: degenerate functional fails, action and scaled pass") {
    auto sys = opsys::diagonal_system(2);
    std::vector<std::vector<CMatrix>> zero_maps(1);
    zero_maps[0] = {CMatrix::Zero(1, 1), CMatrix::Zero(1, 1)};
    auto degenerate = make_functional_lip(sys, zero_maps);
    CHECK(!validate_lipnorm(*degenerate, Rng(1)).kernel_ok);

    // z-rotations alone fix the diagonal: kernel check must flag them
    auto rot_z = rotation_lip(opsys::full_matrix_system(2), {0.1, 0.23, 0.37});
    CHECK(!validate_lipnorm(*rot_z, Rng(6)).kernel_ok);

    auto rot = rotation_lip(opsys::full_matrix_system(2), {0.1, 0.23, 0.37}, true);
    auto rep = validate_lipnorm(*rot, Rng(2));
    CHECK(rep.ok);

    TwoPoint tp = make_two_point(1.0);
    auto scaled = make_scaled_lip(tp.lip, 2.0);
    CHECK(validate_lipnorm(*scaled, Rng(3)).ok);
}

TEST_CASE("coercivity gives a certified diameter upper bound for the two-point system") {
    TwoPoint tp = make_two_point(2.0);
    auto up = tp.lip->diameter_upper();
    REQUIRE(up.has_value());
    CHECK(*up >= 2.0 - 1e-9); // true diameter is d
    CHECK(*up <= 4.0);        // and the bound stays within a small factor
}

TEST_CASE("f-Leibniz: action norms satisfy the usual rule") {
    auto rot = rotation_lip(opsys::full_matrix_system(2), {0.1, 0.2, 0.3, 0.45});
    auto rep = check_f_leibniz(*rot, leibniz_rule, 500, 99);
    CHECK(rep.ok);
    CHECK(rep.usual_leibniz);
    CHECK(rep.max_violation <= 1e-10);
}

TEST_CASE("f-Leibniz: crafted functional counterexample is detected") {
    // L = max(M|x11−x22|, δ|x12|, δ|x21|) on M_2 with M ≫ δ
    auto sys = opsys::full_matrix_system(2);
    const double big = 10.0, small = 1e-2;
    // full_matrix_system(2) basis: {1, e01, e10, e11}; x11−x22 = −2c3... derive:
    // x = c0·1 + c1·e01 + c2·e10 + c3·e11 gives x00 = c0, x11 = c0 + c3,
    // x01 = c1, x10 = c2, so x00 − x11 = −c3, x01 = c1, x10 = c2.
    auto one = [](Complex v) {
        CMatrix m(1, 1);
        m(0, 0) = v;
        return m;
    };
    std::vector<std::vector<CMatrix>> maps(3);
    maps[0] = {one(0), one(0), one(0), one(-big)};
    maps[1] = {one(0), one(small), one(0), one(0)};
    maps[2] = {one(0), one(0), one(small), one(0)};
    auto lip = make_functional_lip(sys, maps);
    CHECK(validate_lipnorm(*lip, Rng(5)).ok);

    auto rep = check_f_leibniz(*lip, leibniz_rule, 500, 7);
    CHECK(!rep.ok);
    CHECK(rep.max_violation > 1.0);
}

TEST_CASE("automorphism representations agree across kinds") {
    auto sys = opsys::full_matrix_system(2);
    CMatrix u(2, 2);
    u << std::polar(1.0, 0.3), 0.0, 0.0, std::polar(1.0, -0.4);

    Automorphism conj_kind;
    conj_kind.kind = Automorphism::Kind::unitary_conjugation;
    conj_kind.matrix = u;

    // vec(U x U*) = (conj(U) ⊗ U) vec(x) for column-major stacking
    Automorphism linear_kind;
    linear_kind.kind = Automorphism::Kind::ambient_linear;
    linear_kind.matrix = kron(u.conjugate(), u);

    Automorphism coeff_kind;
    coeff_kind.kind = Automorphism::Kind::coefficient;
    CMatrix cmap(4, 4);
    for (Eigen::Index l = 0; l < 4; ++l) {
        cmap.col(l) = sys->coefficients(CMatrix(u * sys->basis(l) * u.adjoint()));
    }
    coeff_kind.matrix = cmap;

    Rng rng(14);
    for (int s = 0; s < 5; ++s) {
        CMatrix x = rng.ginibre(2, 2);
        CMatrix a = conj_kind.apply_matrix(*sys, x);
        CMatrix b = linear_kind.apply_matrix(*sys, x);
        CMatrix c = coeff_kind.apply_matrix(*sys, x);
        CHECK(operator_norm(CMatrix(a - b)) <= 1e-12);
        CHECK(operator_norm(CMatrix(a - c)) <= 1e-10);
        CVector moved = coeff_kind.apply_coeff(*sys, sys->coefficients(x));
        CHECK(operator_norm(CMatrix(sys->to_matrix(moved) - a)) <= 1e-10);
    }
}

TEST_CASE("zero element evaluates to exactly zero") {
    TwoPoint tp = make_two_point(1.0);
    CHECK(tp.lip->eval(CVector::Zero(2)).value == 0.0);
    auto rot = rotation_lip(opsys::full_matrix_system(2), {0.2});
    CHECK(rot->eval(CVector::Zero(4)).value == 0.0);
}
