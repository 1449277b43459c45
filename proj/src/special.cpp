#include "srasym/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace srasym {

namespace {

constexpr int kMaxIter = 2000000;
constexpr double kEps = 1e-16;

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("incomplete gamma series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a,x).
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_p(double a, double x) {
    if (!(a > 0) || x < 0)
        throw std::invalid_argument("gamma_p requires a > 0 and x >= 0");
    if (x == 0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0) || x < 0)
        throw std::invalid_argument("gamma_q requires a > 0 and x >= 0");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_upper_tail(double dof, double x) {
    if (!(dof > 0))
        throw std::invalid_argument("chi-square tail requires positive degrees of freedom");
    if (x <= 0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace srasym
