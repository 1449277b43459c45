#pragma once

#include <array>
#include <vector>

#include "srasym/core.hpp"

namespace srasym {

/// Second moments of the pair [j_Y(X,D1), j_YZ(X,R1*,D1,D2)] under the source
/// law, computed by exact summation. The 2x2 matrix is the rate-dispersion
/// matrix; its rank decides the shape of the second-order region.
struct DispersionReport {
    double v_d1 = 0;    // Var[j_Y(X,D1)], nats^2
    double v_d2 = 0;    // Var[j_Z(X,D2)], nats^2
    double v_joint = 0;  // Var[j_YZ(X,R1*,D1,D2)], nats^2
    double covariance = 0;
    std::array<std::array<double, 2>, 2> matrix{};  // [[v_d1, cov], [cov, v_joint]]
    double t_joint = 0;  // E|j_YZ - E j_YZ|^3, nats^3
    int rank = 0;        // eigenvalue threshold 1e-9 relative to trace
    double min_eigenvalue = 0, max_eigenvalue = 0;
    double lambda = 0;   // lambda* from the sum-rate solve, for region queries
};

DispersionReport dispersion_report(const SourceInstance& inst, double R1star);

/// Moment assembly from explicit tilted vectors (exact summation).
DispersionReport dispersion_from_tilted(const Pmf& px, const std::vector<double>& jy,
                                        const std::vector<double>& jz,
                                        const std::vector<double>& jyz);

/// Berry-Esseen remainder magnitude 6 T / (sqrt(n) V^{3/2}).
double be_remainder(const DispersionReport& report, double n);

}  // namespace srasym
