#include "srasym/normal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srasym {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Acklam's rational approximation to the standard normal quantile.
double norm_quantile_estimate(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Adaptive Simpson quadrature.
template <typename F>
double adaptive_simpson(const F& f, double lo, double hi, double fa, double fm, double fb,
                        double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    double flm = f(lm), frm = f(rm);
    double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, lo, mid, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, mid, hi, fm, frm, fb, 0.5 * tol, depth - 1);
}

// Standard bivariate normal cdf P(T1 <= a, T2 <= b) with correlation rho.
double std_bivariate_cdf(double a, double b, double rho) {
    const double cut = 8.5;
    if (a < -cut || b < -cut) return 0.0;
    if (a > cut && b > cut) return 1.0;
    double s = std::sqrt(std::max(1e-300, (1.0 - rho) * (1.0 + rho)));
    auto f = [&](double t) { return normal_pdf(t) * normal_cdf((b - rho * t) / s); };
    double hi = std::min(a, cut);
    double lo = -cut;
    double fa = f(lo), fm = f(0.5 * (lo + hi)), fb = f(hi);
    return adaptive_simpson(f, lo, hi, fa, fm, fb, 1e-11, 48);
}

std::vector<double> default_l1_grid(const RegionQuery& q) {
    double start = std::sqrt(std::max(q.report.v_d1, 0.0)) * q_inv(q.epsilon) - 0.5;
    std::vector<double> grid(200);
    for (int i = 0; i < 200; ++i) grid[i] = start + 6.5 * i / 199.0;
    return grid;
}

bool all_ones_shape(const DispersionReport& r) {
    double tr = r.v_d1 + r.v_joint;
    double tol = 1e-9 * std::max(tr, 1e-300);
    return std::abs(r.v_d1 - r.v_joint) <= tol && std::abs(r.covariance - r.v_d1) <= tol;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double q_func(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double q_inv(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("q_inv requires p in (0,1)");
    double x = -norm_quantile_estimate(p);
    for (int i = 0; i < 3; ++i) {
        double err = q_func(x) - p;
        double deriv = normal_pdf(x);
        if (deriv <= 0) break;
        x += err / deriv;
    }
    return x;
}

int Cov2::rank(double rel_tol) const {
    double tr = v1 + v2;
    double det = v1 * v2 - c * c;
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    double e_max = 0.5 * tr + disc, e_min = 0.5 * tr - disc;
    double thresh = rel_tol * std::max(tr, 0.0);
    return (e_max > thresh ? 1 : 0) + (e_min > thresh ? 1 : 0);
}

double bivariate_psi(double x, double y, const Cov2& cov) {
    if (cov.v1 < -1e-12 || cov.v2 < -1e-12 ||
        cov.v1 * cov.v2 - cov.c * cov.c < -1e-9 * (1.0 + cov.v1 * cov.v2))
        throw std::invalid_argument("covariance is not positive semidefinite");
    int rk = cov.rank();
    if (rk == 0)
        throw std::invalid_argument("degenerate dispersion matrix");
    if (rk == 1) {
        if (cov.v1 > 0 && cov.v2 > 0) {
            if (cov.c < 0)
                throw std::invalid_argument(
                    "rank-1 covariance with negative slope is outside the supported regime");
            double s1 = std::sqrt(cov.v1);
            return normal_cdf(std::min(x / s1, y * s1 / cov.c));
        }
        if (cov.v1 > 0) return y >= 0 ? normal_cdf(x / std::sqrt(cov.v1)) : 0.0;
        return x >= 0 ? normal_cdf(y / std::sqrt(cov.v2)) : 0.0;
    }
    double s1 = std::sqrt(cov.v1), s2 = std::sqrt(cov.v2);
    double rho = cov.c / (s1 * s2);
    if (rho > 1.0 - 1e-12) {
        return normal_cdf(std::min(x / s1, y / s2));
    }
    if (rho < -1.0 + 1e-12)
        throw std::invalid_argument(
            "near-singular negative correlation is outside the supported regime");
    return std_bivariate_cdf(x / s1, y / s2, rho);
}

CaseTag parse_case_tag(const std::string& s) {
    if (s == "i") return CaseTag::i;
    if (s == "ii") return CaseTag::ii;
    if (s == "iii") return CaseTag::iii;
    throw std::invalid_argument("case tag must be one of i, ii, iii");
}

RegionBoundary second_order_region(const RegionQuery& q) {
    if (!(q.epsilon > 0 && q.epsilon < 1))
        throw std::invalid_argument("epsilon must lie strictly inside (0,1)");
    const double z = q_inv(q.epsilon);
    RegionBoundary out;

    if (q.case_tag == CaseTag::i) {
        double rhs = std::sqrt(std::max(q.report.v_joint, 0.0)) * z;
        out.closed_form = "half-plane";
        out.corner = rhs;
        std::vector<double> grid = q.l1_grid.empty() ? default_l1_grid(q) : q.l1_grid;
        for (double l1 : grid) out.points.push_back({l1, rhs - q.lambda * l1});
        return out;
    }
    if (q.case_tag == CaseTag::ii) {
        double rhs = std::sqrt(std::max(q.report.v_d1, 0.0)) * z;
        out.closed_form = "half-plane";
        out.corner = rhs;
        for (int i = 0; i < 40; ++i) out.points.push_back({rhs, 6.0 - i * 0.25});
        return out;
    }

    if (q.report.rank < 1)
        throw std::invalid_argument("case (iii) requires a dispersion matrix of rank >= 1");

    if (q.report.rank == 1 && all_ones_shape(q.report)) {
        double k = std::sqrt(q.report.v_d1) * z;
        out.closed_form = "rectangle";
        out.corner = k;
        for (int i = 0; i <= 24; ++i) out.points.push_back({k, k + 6.0 * (24 - i) / 24.0});
        for (int i = 1; i <= 24; ++i) out.points.push_back({k + 6.0 * i / 24.0, k});
        return out;
    }

    out.closed_form = "curve";
    Cov2 cov{q.report.v_d1, q.report.covariance, q.report.v_joint};
    const double target = 1.0 - q.epsilon;
    std::vector<double> grid = q.l1_grid.empty() ? default_l1_grid(q) : q.l1_grid;
    const double span = 12.0 * std::sqrt(std::max(q.report.v_joint, 1e-12)) + 12.0;
    for (double l1 : grid) {
        // L2 -> Psi is non-decreasing; the sup over L2 is the L1 marginal.
        if (normal_cdf(l1 / std::sqrt(q.report.v_d1)) <= target) continue;
        double lo = -q.lambda * l1 - span, hi = -q.lambda * l1 + span;
        if (bivariate_psi(l1, q.lambda * l1 + hi, cov) < target) continue;
        for (int it = 0; it < 100 && hi - lo > 1e-8; ++it) {
            double mid = 0.5 * (lo + hi);
            if (bivariate_psi(l1, q.lambda * l1 + mid, cov) >= target)
                hi = mid;
            else
                lo = mid;
        }
        out.points.push_back({l1, 0.5 * (lo + hi)});
    }
    return out;
}

double boundary_l1_at_l2(const RegionQuery& q, double l2) {
    if (q.case_tag != CaseTag::iii)
        throw std::invalid_argument("L1 boundary query applies to case (iii)");
    Cov2 cov{q.report.v_d1, q.report.covariance, q.report.v_joint};
    const double target = 1.0 - q.epsilon;
    double scale = std::sqrt(std::max(q.report.v_d1, 1e-12));
    double lo = -12.0 * scale - 12.0, hi = 12.0 * scale + 12.0;
    if (bivariate_psi(hi, q.lambda * hi + l2, cov) < target)
        throw std::runtime_error("no boundary point at this L2");
    for (int it = 0; it < 120 && hi - lo > 1e-9; ++it) {
        double mid = 0.5 * (lo + hi);
        if (bivariate_psi(mid, q.lambda * mid + l2, cov) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double mdc_constant(const MdcQuery& q, CaseTag tag) {
    if (!(q.theta1 > 0) || !(q.theta2 > 0))
        throw std::invalid_argument("theta parameters must be positive");
    const double th = q.theta();
    switch (tag) {
        case CaseTag::i:
            if (!(q.report.v_joint > 0)) throw std::invalid_argument("zero joint dispersion");
            return th * th / (2.0 * q.report.v_joint);
        case CaseTag::ii:
            if (!(q.report.v_d1 > 0)) throw std::invalid_argument("zero decoder-1 dispersion");
            return q.theta1 * q.theta1 / (2.0 * q.report.v_d1);
        default: {
            if (!(q.report.v_d1 > 0) || !(q.report.v_joint > 0))
                throw std::invalid_argument("zero dispersion");
            double a = q.theta1 * q.theta1 / (2.0 * q.report.v_d1);
            double b = th * th / (2.0 * q.report.v_joint);
            return std::min(a, b);
        }
    }
}

}  // namespace srasym
