#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"

using namespace flateta;

TEST_CASE("chern character of flat connections is the rank") {
    const GridManifold t3 = make_torus_grid(3, 8);
    const Connection triv = make_flat_connection(t3, {Matrix::Zero(3, 3), Matrix::Zero(3, 3),
                                                      Matrix::Zero(3, 3)});
    const Form ch = chern_character(triv);
    CHECK((ch - cplx(3.0) * identity_form(t3, 1)).max_abs() <= 1e-13);

    const BuiltBundle bb = build_bundle(oracles::t3_rank2_spec(12));
    const Form ch_flat = chern_character(bb.conn);
    CHECK((ch_flat - cplx(2.0) * identity_form(bb.mani, 1)).max_abs() <= 1e-10);
}

TEST_CASE("chern character expands the curvature by hand to degree 2") {
    // A = 0.4 sin(theta1) dtheta2 gives curvature F = 0.4 cos(theta1) d1^d2;
    // pointwise ch = 1 - F/(2 pi i)
    const GridManifold t3 = make_torus_grid(3, 16);
    Form a(t3, 1);
    a.component(0b010);
    for (int p = 0; p < t3.points(); ++p)
        a.at(0b010, p)(0, 0) = 0.4 * std::sin(t3.theta(t3.coords(p)[0]));
    const Form ch = chern_character(Connection{t3, 1, a, false});
    double worst = 0.0;
    for (int p = 0; p < t3.points(); ++p) {
        const cplx f = 0.4 * std::cos(t3.theta(t3.coords(p)[0]));
        worst = std::max(worst, std::abs(ch.at(0, p)(0, 0) - 1.0));
        worst = std::max(worst, std::abs(ch.at(0b011, p)(0, 0) - (-f / cplx(0.0, kTwoPi))));
    }
    CHECK(worst <= 1e-11);
}

TEST_CASE("odd chern form: rank-1 circle example") {
    const BuiltBundle bb = build_bundle(oracles::s1_rank1_spec());
    const Form c1 = odd_chern_form(bb.omega, 0);
    for (int p = 0; p < bb.mani.points(); ++p)
        CHECK(std::abs(c1.at(1, p)(0, 0) - cplx(-0.3)) <= 5e-13);
    CHECK(std::abs(integrate_top(c1) - cplx(-0.6 * kPi)) <= 1e-12);

    CHECK(odd_chern_form(Form(bb.mani, 2), 0).max_abs() == 0.0);
    CHECK(odd_chern_form(bb.omega, 1).max_abs() == 0.0);  // 2j+1 > dim
}

TEST_CASE("odd chern form degree 3 against the permutation oracle") {
    // constant noncommuting matrix 1-form fed directly into the definition
    const GridManifold t3 = make_torus_grid(3, 8);
    oracles::Rng rng(53);
    Matrix w[3];
    for (auto& m : w) {
        m = Matrix(2, 2);
        for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = oracles::random_cplx(rng, 0.6);
    }
    Form omega(t3, 2);
    for (int axis = 0; axis < 3; ++axis) {
        omega.component(1 << axis);
        for (int p = 0; p < t3.points(); ++p) omega.at(1 << axis, p) = w[axis];
    }
    const cplx period = integrate_top(odd_chern_form(omega, 1));
    const cplx oracle = std::pow(cplx(0.0, kTwoPi), cplx(-1.0)) * std::pow(2.0, -3.0) *
                        oracles::antisymmetrized_trace(w[0], w[1], w[2]) * kTwoPi * kTwoPi * kTwoPi;
    CHECK(std::abs(period - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
    CHECK(std::abs(oracle) > 1e-4);  // the data genuinely exercises j = 1
}

TEST_CASE("odd chern forms are closed and metric independent at period level") {
    const BuiltBundle bb = build_bundle(oracles::t3_rank2_spec());
    for (int j = 0; j <= 1; ++j)
        CHECK(exterior_d(odd_chern_form(bb.omega, j)).max_abs() <= 1e-9);

    Matrix g1(2, 2);
    g1 << 1.4, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.8;
    const Form omega_other = omega_form(bb.conn, make_constant_metric(bb.mani, g1));
    for (int j = 0; j <= 1; ++j) {
        const PairingVector pa = pair_cycles(odd_chern_form(bb.omega, j));
        const PairingVector pb = pair_cycles(odd_chern_form(omega_other, j));
        for (size_t i = 0; i < pa.size(); ++i) CHECK(std::abs(pa[i] - pb[i]) <= 1e-8);
    }

    // periods of the odd Chern forms are real
    for (int j = 0; j <= 1; ++j)
        for (const cplx p : pair_cycles(odd_chern_form(bb.omega, j)))
            CHECK(std::fabs(p.imag()) <= 1e-9);
}

TEST_CASE("a_coeff values") {
    CHECK(a_coeff(0, cplx(1.7, 0.3)) == cplx(1.0));
    CHECK(std::abs(a_coeff(1, cplx(0.0, 1.0)) - cplx(2.0 / 3.0)) <= 1e-15);
    CHECK(std::abs(a_coeff(2, cplx(0.0, 1.0)) - cplx(8.0 / 15.0)) <= 1e-15);
    CHECK(std::abs(a_coeff(1, cplx(1.0)) - cplx(4.0 / 3.0)) <= 1e-15);
    CHECK_THROWS_AS(a_coeff(-1, cplx(0.0)), std::invalid_argument);
}

TEST_CASE("a_coeff table matches the closed form and normalizes at zero") {
    const ACoeffTable table = ACoeffTable::build(20);
    oracles::Rng rng(59);
    for (int j = 0; j <= 20; ++j) {
        CHECK(table.coeff[j][0] == 1.0);  // a_j(0) = 1
        const cplx r = oracles::random_cplx(rng, 1.2);
        const cplx a = table.eval(j, r);
        const cplx b = a_coeff(j, r);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
    CHECK_THROWS_AS(table.eval(21, cplx(0.0)), std::out_of_range);
}

TEST_CASE("a_coeff against quadrature of the defining integral") {
    double worst = 0.0;
    for (int j = 0; j <= 20; ++j) {
        for (const cplx r : {cplx(0.0), cplx(0.5), cplx(-0.5), cplx(1.0), cplx(-1.0),
                             cplx(0.0, 2.0), cplx(0.0, -2.0), cplx(0.0, 1.0)}) {
            const cplx closed = a_coeff(j, r);
            const cplx quad = oracles::a_coeff_quadrature(j, r);
            worst = std::max(worst, std::abs(closed - quad) / std::max(1.0, std::abs(closed)));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("endpoint identity in exact rational arithmetic") {
    for (int j = 0; j <= 20; ++j) {
        const Rational lhs = a_coeff_at_i_exact(j);
        const Rational rhs = wallis_ratio_exact(j);
        CHECK(lhs == rhs);
    }
    // small-j cross-check of the reference against 2^{2j}(j!)^2/(2j+1)!
    long long fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
    for (int j = 0; j <= 3; ++j) {
        long long num = (1LL << (2 * j)) * fact[j] * fact[j];
        long long den = fact[2 * j + 1];
        const Rational direct = Rational::of(num, den);
        CHECK(wallis_ratio_exact(j) == direct);
    }
    CHECK(a_coeff_at_i_exact(1).str() == "2/3");
    CHECK(a_coeff_at_i_exact(2).str() == "8/15");
}

TEST_CASE("cs_transgression of a constant path is zero") {
    const BuiltBundle bb = build_bundle(oracles::s1_rank1_spec());
    CHECK(cs_transgression(bb.conn_e, bb.conn_e, 8).max_abs() <= 1e-16);
}

TEST_CASE("cs_transgression rank-1 circle period") {
    const BuiltBundle bb = build_bundle(oracles::s1_rank1_spec());
    const Connection c1 = deform(bb.conn_e, bb.omega, cplx(1.0));
    const Form cs = cs_transgression(bb.conn_e, c1, 32);
    CHECK(std::abs(pair_cycles(cs)[0] - cplx(0.3)) <= 1e-12);
}

TEST_CASE("cs shape mismatch and node-count errors") {
    const BuiltBundle bb = build_bundle(oracles::s1_rank1_spec());
    const GridManifold other = make_torus_grid(1, 32);
    const Connection c_other =
        make_flat_connection(other, {Matrix::Constant(1, 1, cplx(0.1, 0.0))});
    CHECK_THROWS_AS(cs_transgression(bb.conn_e, c_other, 8), std::invalid_argument);
    CHECK_THROWS_AS(cs_transgression(bb.conn_e, bb.conn_e, 1), std::invalid_argument);
}

TEST_CASE("transgression differential against random curved connections") {
    // strongest form of dCS = ch1 - ch0: both sides nonzero pointwise
    oracles::Rng rng(61);
    const GridManifold t3 = make_torus_grid(3, 12);
    for (int trial = 0; trial < 2; ++trial) {
        const Form a0 = oracles::random_form(t3, 2, {1, 2, 4}, rng, 0.25);
        const Form a1 = oracles::random_form(t3, 2, {1, 2, 4}, rng, 0.25);
        const Connection c0 = make_connection(a0);
        const Connection c1 = make_connection(a1);
        const Form diff = chern_character(c1) - chern_character(c0);
        CHECK(diff.max_abs() > 1e-3);  // nontrivial right-hand side
        const Form gap = exterior_d(cs_transgression(c0, c1, 32)) - diff;
        CHECK(gap.max_abs() <= 1e-8);
    }
}

TEST_CASE("cs_series matches the transgression and vanishes at r = 0") {
    const BuiltBundle s1 = build_bundle(oracles::s1_rank1_spec());
    CHECK(cs_series(s1.omega, cplx(0.0)).max_abs() == 0.0);
    CHECK(std::abs(pair_cycles(cs_series(s1.omega, cplx(1.0)))[0] - cplx(0.3)) <= 1e-13);

    const BuiltBundle t3 = build_bundle(oracles::t3_rank2_spec());
    for (const cplx r : {cplx(0.5), cplx(-1.0), cplx(2.0), cplx(0.0, 1.0)}) {
        const Connection conn_r = deform(t3.conn_e, t3.omega, r);
        const PairingVector pa = pair_cycles(cs_transgression(t3.conn_e, conn_r, 32));
        const PairingVector pb = pair_cycles(cs_series(t3.omega, r));
        for (size_t i = 0; i < pa.size(); ++i) CHECK(std::abs(pa[i] - pb[i]) <= 1e-7);
    }
}

TEST_CASE("cs_series at r = i carries the 2^{2j} j!/(2j+1)! weights") {
    const BuiltBundle t3 = build_bundle(oracles::t3_rank2_spec(12));
    const Form series = cs_series(t3.omega, cplx(0.0, 1.0));
    Form expected(t3.mani, 1);
    double factorial = 1.0;
    for (int j = 0; 2 * j + 1 <= 3; ++j) {
        if (j > 0) factorial *= j;
        const cplx weight =
            -(cplx(0.0, 1.0) / kTwoPi) * wallis_ratio_exact(j).to_double() / factorial;
        expected += weight * odd_chern_form(t3.omega, j);
    }
    CHECK((series - expected).max_abs() <= 1e-14);
}

TEST_CASE("path independence of CS periods") {
    const BuiltBundle t3 = build_bundle(oracles::t3_rank2_spec(12));
    const Connection conn_r = deform(t3.conn_e, t3.omega, cplx(1.0));
    const Form a0 = t3.conn_e.coeff;
    const Form diff = conn_r.coeff - t3.conn_e.coeff;

    const Form linear = cs_transgression(t3.conn_e, conn_r, 32);

    // quadratic reparametrization of the same segment: identical form
    ConnectionPath reparam{
        [&](double t) { return a0 + cplx(t * t) * diff; },
        [&](double t) { return cplx(2.0 * t) * diff; },
    };
    CHECK((cs_transgression_path(reparam, 32) - linear).max_abs() <= 1e-12);

    // off-segment bulge in the antiholomorphic direction: CS changes by an
    // exact form, so the periods must not
    const Form bulge_dir = adjoint_form(diff);
    ConnectionPath bulge{
        [&](double t) { return a0 + cplx(t) * diff + cplx(0.3 * t * (1.0 - t)) * bulge_dir; },
        [&](double t) { return diff + cplx(0.3 * (1.0 - 2.0 * t)) * bulge_dir; },
    };
    const Form other = cs_transgression_path(bulge, 32);
    CHECK((other - linear).max_abs() > 1e-6);  // genuinely different forms
    const PairingVector pa = pair_cycles(linear);
    const PairingVector pb = pair_cycles(other);
    for (size_t i = 0; i < pa.size(); ++i) CHECK(std::abs(pa[i] - pb[i]) <= 1e-7);
}

TEST_CASE("CS periods are real for real r and never depend on the phi branch") {
    const BuiltBundle t3 = build_bundle(oracles::t3_rank2_spec(12));
    const Connection conn_r = deform(t3.conn_e, t3.omega, cplx(0.75));
    const Form cs = cs_transgression(t3.conn_e, conn_r, 32);
    for (const cplx p : pair_cycles(cs)) CHECK(std::fabs(p.imag()) <= 1e-9);

    const Form flipped = cs_transgression(t3.conn_e, conn_r, 32, SqrtBranch::flipped);
    CHECK((cs - flipped).max_abs() <= 1e-12);
    CHECK((chern_character(conn_r, SqrtBranch::flipped) - chern_character(conn_r)).max_abs() <=
          1e-13);
}

TEST_CASE("defect_rhs on the circle examples") {
    const BuiltBundle bb = build_bundle(oracles::s1_rank1_spec());

    const Form zero_omega(bb.mani, 1);
    const DefectPrediction none = defect_rhs(bb.ahat, bb.ch_e, zero_omega, cplx(0.7));
    CHECK(std::abs(none.value) == 0.0);

    for (const cplx r : {cplx(1.0), cplx(-0.5), cplx(2.0), cplx(0.0, 1.0)}) {
        const DefectPrediction pred = defect_rhs(bb.ahat, bb.ch_e, bb.omega, r);
        CHECK(std::abs(pred.value - cplx(0.3) * r) <= 1e-12);
        cplx sum(0.0);
        for (const cplx term : pred.per_j) sum += term;
        CHECK(std::abs(sum - pred.value) == 0.0);
    }

    // E of rank 3 scales the prediction
    const Form ch3 = constant_form(bb.mani, Matrix::Constant(1, 1, cplx(3.0)));
    const DefectPrediction scaled = defect_rhs(bb.ahat, ch3, bb.omega, cplx(1.0));
    CHECK(std::abs(scaled.value - cplx(0.9)) <= 1e-12);
}
