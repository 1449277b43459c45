#pragma once

#include <cstddef>
#include <vector>

#include "srasym/core.hpp"

namespace srasym {

/// Solution of the single-decoder rate-distortion problem
///   R(D) = inf { I(X;Y) : E[d(X,Y)] <= D }.
struct RdSolution {
    double rate = 0;                                 // nats
    std::vector<std::vector<double>> test_channel;   // P*(y|x)
    std::vector<double> output_law;                  // P*_Y, pruned below 1e-14
    double slope = 0;                                // s* = -dR/dD >= 0
    std::vector<double> tilted;                      // distortion-tilted density per x
    double achieved_distortion = 0;
    double distortion_level = 0;                     // the D that was solved
    int sweeps = 0;                                  // alternating-minimization sweeps
};

/// Alternating minimization over the test channel and output law at fixed
/// Lagrange slope, with an outer bisection on the slope to meet E[d] = D.
/// Throws on invalid input or if the iteration cap is hit before the rate
/// settles (the message reports the final gap).
RdSolution rd_solve(const Pmf& px, const DistortionMatrix& d, double D);

/// Tilted density lookup, j(x) = -log sum_y P*_Y(y) exp(-s*(d(x,y)-D)).
double tilted_density(const RdSolution& sol, std::size_t x);

}  // namespace srasym
