#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "srasym/normal.hpp"
#include "srasym/rng.hpp"

using namespace srasym;

TEST_CASE("Gaussian tail function and its inverse") {
    CHECK_ABS(q_func(0.0), 0.5, 1e-15);
    CHECK_ABS(q_inv(0.5), 0.0, 1e-12);
    CHECK_ABS(q_inv(0.05), 1.6448536270, 1e-9);
    CHECK_ABS(q_inv(0.05), oracles::q_inv_bisect(0.05), 1e-11);
    CHECK_ABS(q_inv(0.005), oracles::q_inv_bisect(0.005), 1e-11);

    for (double p : {1e-9, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9})
        CHECK(std::abs(q_func(q_inv(p)) - p) <= 1e-12);
    // Round trip on [-8, 8]. Toward -8 the tail probability is within a few
    // ulp of 1, so the recoverable accuracy degrades to ulp(1)/pdf(x); the
    // tolerance accounts for that representation limit.
    for (double x = -8.0; x <= 8.0; x += 0.5) {
        double tol = std::max(1e-10, 4.0 * 1.2e-16 / (0.3989422804 * std::exp(-0.5 * x * x)));
        CHECK_ABS(q_inv(q_func(x)), x, tol);
    }

    CHECK_THROWS_AS(q_inv(0.0), std::invalid_argument);
    CHECK_THROWS_AS(q_inv(1.0), std::invalid_argument);
}

TEST_CASE("bivariate Psi closed forms") {
    Cov2 ident{1.0, 0.0, 1.0};
    CHECK_ABS(bivariate_psi(0.0, 0.0, ident), 0.25, 1e-9);
    CHECK_ABS(bivariate_psi(50.0, 50.0, ident), 1.0, 1e-8);
    Cov2 half{1.0, 0.5, 1.0};
    CHECK_ABS(bivariate_psi(0.0, 0.0, half), 1.0 / 3.0, 1e-8);
}

TEST_CASE("Psi orthants agree with the dense-quadrature oracle") {
    Xoshiro256 rng(11);
    for (int i = 0; i < 12; ++i) {
        double rho = -0.95 + 1.9 * rng.uniform();
        double x = -1.5 + 3.0 * rng.uniform();
        double y = -1.5 + 3.0 * rng.uniform();
        Cov2 cov{1.0, rho, 1.0};
        CAPTURE(rho);
        CAPTURE(x);
        CAPTURE(y);
        CHECK_ABS(bivariate_psi(x, y, cov), oracles::psi_simpson(x, y, rho), 1e-7);
        CHECK_ABS(bivariate_psi(0.0, 0.0, cov), oracles::orthant_probability(rho), 1e-8);
    }
}

TEST_CASE("Psi monotonicity and range") {
    Cov2 cov{2.0, 0.7, 1.0};
    double prev = 0;
    for (double x = -3; x <= 3; x += 0.5) {
        double v = bivariate_psi(x, 0.7, cov);
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    prev = 0;
    for (double y = -3; y <= 3; y += 0.5) {
        double v = bivariate_psi(0.4, y, cov);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("rank-1 Psi is the limit of nearly singular covariances") {
    double v1 = 0.8, k = 1.3;
    Cov2 singular{v1, k * v1, k * k * v1};
    for (auto [delta, tol] : {std::pair{1e-3, 1e-2}, std::pair{1e-4, 1e-3}}) {
        Cov2 near{v1, (1 - delta) * k * v1, k * k * v1};
        for (double x : {-0.5, 0.3, 1.2})
            for (double y : {0.1, 0.9, 2.0}) {
                CAPTURE(delta);
                CHECK_ABS(bivariate_psi(x, y, near), bivariate_psi(x, y, singular), tol);
            }
    }
}

TEST_CASE("degenerate covariances are rejected or reduced") {
    CHECK_THROWS_WITH_AS(bivariate_psi(0, 0, Cov2{0, 0, 0}),
                         doctest::Contains("degenerate dispersion matrix"), std::invalid_argument);
    CHECK_THROWS_AS(bivariate_psi(0, 0, Cov2{1.0, -1.0, 1.0}), std::invalid_argument);
    // One identically-zero component.
    CHECK_ABS(bivariate_psi(1.0, 0.5, Cov2{1.0, 0.0, 0.0}), normal_cdf(1.0), 1e-12);
    CHECK(bivariate_psi(1.0, -0.5, Cov2{1.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("second-order region closed forms") {
    DispersionReport rep;
    rep.v_d1 = 0.5;
    rep.v_joint = 0.5;
    rep.covariance = 0.0;
    rep.matrix = {{{0.5, 0.0}, {0.0, 0.5}}};
    rep.rank = 2;

    RegionQuery qi{CaseTag::i, 0.05, rep, 0.0, {}};
    RegionBoundary bi = second_order_region(qi);
    CHECK(bi.closed_form == "half-plane");
    CHECK_ABS(bi.corner, 1.1630872, 1e-5);
    for (const auto& pt : bi.points) CHECK_ABS(pt.l2, bi.corner, 1e-12);

    RegionQuery qii{CaseTag::ii, 0.05, rep, 0.0, {}};
    RegionBoundary bii = second_order_region(qii);
    CHECK(bii.closed_form == "half-plane");
    CHECK_ABS(bii.corner, 1.1630872, 1e-5);
}

TEST_CASE("rectangle corner for the all-ones rank-1 matrix") {
    const double v = 0.3074899289;
    DispersionReport rep;
    rep.v_d1 = rep.v_joint = rep.covariance = v;
    rep.matrix = {{{v, v}, {v, v}}};
    rep.rank = 1;
    RegionQuery q{CaseTag::iii, 0.05, rep, 0.0, {}};
    RegionBoundary b = second_order_region(q);
    CHECK(b.closed_form == "rectangle");
    CHECK_ABS(b.corner, std::sqrt(v) * q_inv(0.05), 1e-10);
    CHECK_ABS(b.corner, 0.9121, 1e-3);

    // The generic bisection route through the rank-1 Psi reduction must land
    // on the same corner.
    Cov2 cov{v, v, v};
    for (double l1 : {b.corner + 0.1, b.corner + 1.0, b.corner + 3.0}) {
        double lo = -5, hi = 8;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if (bivariate_psi(l1, mid, cov) >= 0.95)
                hi = mid;
            else
                lo = mid;
        }
        CHECK_ABS(0.5 * (lo + hi), b.corner, 1e-6);
    }
}

TEST_CASE("case (iii) curved boundary is monotone and feasible") {
    DispersionReport rep;
    rep.v_d1 = 0.0258;
    rep.v_joint = 0.0542;
    rep.covariance = 0.0352;
    rep.matrix = {{{rep.v_d1, rep.covariance}, {rep.covariance, rep.v_joint}}};
    rep.rank = 2;
    RegionQuery q{CaseTag::iii, 0.005, rep, 0.0, {}};
    RegionBoundary b = second_order_region(q);
    CHECK(b.closed_form == "curve");
    CHECK(b.points.size() > 100);
    for (std::size_t i = 1; i < b.points.size(); ++i) {
        CHECK(b.points[i].l1 > b.points[i - 1].l1);
        CHECK(b.points[i].l2 <= b.points[i - 1].l2 + 1e-9);
    }
    // Every sampled point satisfies the defining inequality to quadrature
    // accuracy.
    Cov2 cov{rep.v_d1, rep.covariance, rep.v_joint};
    for (std::size_t i = 0; i < b.points.size(); i += 25)
        CHECK(bivariate_psi(b.points[i].l1, b.points[i].l2, cov) >= 0.995 - 1e-6);
}

TEST_CASE("case (iii) requires a nondegenerate matrix and interior epsilon") {
    DispersionReport zero;
    RegionQuery bad{CaseTag::iii, 0.05, zero, 0.0, {}};
    CHECK_THROWS_AS(second_order_region(bad), std::invalid_argument);
    DispersionReport ok;
    ok.v_d1 = ok.v_joint = ok.covariance = 1.0;
    ok.rank = 1;
    RegionQuery eps{CaseTag::iii, 0.0, ok, 0.0, {}};
    CHECK_THROWS_AS(second_order_region(eps), std::invalid_argument);
}

TEST_CASE("moderate deviations constants") {
    DispersionReport rep;
    rep.v_d1 = rep.v_joint = 0.3074899289;
    MdcQuery q{1.0, 1.0, rep, 0.0};
    CHECK_ABS(mdc_constant(q, CaseTag::iii), 1.0 / (2.0 * 0.3074899289), 1e-12);
    CHECK_ABS(mdc_constant(q, CaseTag::iii), 1.626070, 1e-6);
    // Case (iii) is the minimum of the other two by construction.
    double ci = mdc_constant(q, CaseTag::i);
    double cii = mdc_constant(q, CaseTag::ii);
    CHECK_ABS(mdc_constant(q, CaseTag::iii), std::min(ci, cii), 1e-15);

    MdcQuery doubled{2.0, 1.0, rep, 0.0};
    CHECK_ABS(mdc_constant(doubled, CaseTag::ii), 4.0 * mdc_constant(q, CaseTag::ii), 1e-12);

    DispersionReport degenerate;
    CHECK_THROWS_AS(mdc_constant(MdcQuery{1, 1, degenerate, 0}, CaseTag::i),
                    std::invalid_argument);
}
