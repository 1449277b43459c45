#include "srasym/dispersion.hpp"

#include <cmath>
#include <stdexcept>

#include "srasym/rd.hpp"
#include "srasym/sr.hpp"

namespace srasym {

namespace {

double mean_of(const Pmf& px, const std::vector<double>& v) {
    double m = 0;
    for (std::size_t x = 0; x < px.size(); ++x) m += px[x] * v[x];
    return m;
}

double cov_of(const Pmf& px, const std::vector<double>& u, double mu, const std::vector<double>& v,
              double mv) {
    double c = 0;
    for (std::size_t x = 0; x < px.size(); ++x) c += px[x] * (u[x] - mu) * (v[x] - mv);
    return c;
}

}  // namespace

DispersionReport dispersion_from_tilted(const Pmf& px, const std::vector<double>& jy,
                                        const std::vector<double>& jz,
                                        const std::vector<double>& jyz) {
    DispersionReport r;
    const double my = mean_of(px, jy), mz = mean_of(px, jz), mj = mean_of(px, jyz);
    r.v_d1 = cov_of(px, jy, my, jy, my);
    r.v_d2 = cov_of(px, jz, mz, jz, mz);
    r.v_joint = cov_of(px, jyz, mj, jyz, mj);
    r.covariance = cov_of(px, jy, my, jyz, mj);
    r.matrix = {{{r.v_d1, r.covariance}, {r.covariance, r.v_joint}}};
    for (std::size_t x = 0; x < px.size(); ++x) {
        double d = std::abs(jyz[x] - mj);
        r.t_joint += px[x] * d * d * d;
    }
    // Symmetric 2x2 eigenvalues in closed form.
    double tr = r.v_d1 + r.v_joint;
    double det = r.v_d1 * r.v_joint - r.covariance * r.covariance;
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    r.max_eigenvalue = 0.5 * tr + disc;
    r.min_eigenvalue = 0.5 * tr - disc;
    double thresh = 1e-9 * std::max(tr, 0.0);
    r.rank = (r.max_eigenvalue > thresh ? 1 : 0) + (r.min_eigenvalue > thresh ? 1 : 0);
    return r;
}

DispersionReport dispersion_report(const SourceInstance& inst, double R1star) {
    RdSolution rd1 = rd_solve(inst.px, inst.d1, inst.D1);
    RdSolution rd2 = rd_solve(inst.px, inst.d2, inst.D2);
    SrSolution sr = sr_solve(inst, R1star);
    if (!sr.feasible)
        throw std::runtime_error("dispersion report requires a feasible rate point");
    DispersionReport r = dispersion_from_tilted(inst.px, rd1.tilted, rd2.tilted, sr.tilted_yz);
    r.lambda = sr.lambda;
    return r;
}

double be_remainder(const DispersionReport& report, double n) {
    if (!(report.v_joint > 0))
        throw std::invalid_argument("degenerate dispersion");
    if (!(n > 0))
        throw std::invalid_argument("blocklength must be positive");
    return 6.0 * report.t_joint / (std::sqrt(n) * std::pow(report.v_joint, 1.5));
}

}  // namespace srasym
