#pragma once

#include <string>
#include <vector>

#include "srasym/dispersion.hpp"

namespace srasym {

/// Standard Gaussian complementary cdf and its inverse (rational initial
/// guess + Newton refinement, |q_func(q_inv(p)) - p| <= 1e-12).
double q_func(double x);
double q_inv(double p);
double normal_cdf(double x);

/// 2x2 covariance with closed-form spectral helpers.
struct Cov2 {
    double v1 = 0, c = 0, v2 = 0;
    int rank(double rel_tol = 1e-9) const;
};

/// P(U1 <= x, U2 <= y) for zero-mean Gaussian with covariance cov. Full-rank
/// covariances integrate the conditional cdf along one axis with adaptive
/// subdivision (abs tol 1e-8); rank-1 covariances reduce to a univariate cdf.
/// Rank 0 is rejected.
double bivariate_psi(double x, double y, const Cov2& cov);

enum class CaseTag { i, ii, iii };
CaseTag parse_case_tag(const std::string& s);

struct RegionQuery {
    CaseTag case_tag = CaseTag::iii;
    double epsilon = 0.05;
    DispersionReport report;
    double lambda = 0;
    std::vector<double> l1_grid;  // case (iii) sampling; default if empty
};

struct BoundaryPoint {
    double l1 = 0, l2 = 0;
};

struct RegionBoundary {
    std::vector<BoundaryPoint> points;
    std::string closed_form;  // "half-plane", "rectangle" or "curve"
    double corner = 0;        // rectangle corner / half-plane offset
};

RegionBoundary second_order_region(const RegionQuery& q);

/// Minimal L1 on the case-(iii) boundary at a given L2 (bisection in L1).
double boundary_l1_at_l2(const RegionQuery& q, double l2);

struct MdcQuery {
    double theta1 = 1, theta2 = 1;
    DispersionReport report;
    double lambda = 0;
    double theta() const { return lambda * theta1 + theta2; }
};

double mdc_constant(const MdcQuery& q, CaseTag tag);

}  // namespace srasym
