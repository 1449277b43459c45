#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "srasym/core.hpp"

namespace srasym {

/// Minimal sum rate R2 such that (R1, R2) lies in the achievable region:
///   inf I(X;YZ)  s.t.  E[d1] <= D1, E[d2] <= D2, I(X;Y) <= R1.
/// Infeasibility (R1 below the decoder-1 rate-distortion function) is an
/// explicit state, never a sentinel float.
struct SrSolution {
    bool feasible = false;
    double value = 0;  // nats; meaningful only when feasible
    std::vector<std::vector<double>> test_channel;  // feasible P(y,z|x), z fastest
    std::vector<std::vector<double>> tilt_channel;  // raw fixed-point channel
    std::vector<double> joint_law;                  // induced P*_YZ
    std::size_t ny = 0, nz = 0;
    double lambda = 0, nu1 = 0, nu2 = 0;  // dual multipliers, all >= 0
    std::vector<double> tilted_yz;        // per source symbol, nats
    struct Active {
        bool rate = false, d1 = false, d2 = false;
    } active;
    // Diagnostics.
    double dual_value = 0;
    double primal_value = 0;  // from the feasibility-repaired channel
    double gap = 0;
    double i_xy = 0, e_d1 = 0, e_d2 = 0;  // at the reported channel
};

struct SrOptions {
    double multiplier_tol = 1e-9;
    int max_cycles = 60;
    bool restart_check = true;  // 5 random inner restarts, tilted must agree
    std::optional<std::array<double, 3>> warm_multipliers;  // lambda, nu1, nu2
};

SrSolution sr_solve(const SourceInstance& inst, double R1, const SrOptions& opts = {});

/// Tilted density lookup on a solved instance.
double tilted_yz(const SrSolution& sol, std::size_t x);

/// Multipliers, reference law and per-symbol values of the generalized tilted
/// information density at the solved point.
struct GeneralizedTilted {
    double lambda = 0, nu1 = 0, nu2 = 0;
    std::vector<double> reference_law;  // joint law on (y, z), z fastest
    std::vector<double> values;         // one entry per source symbol
};
GeneralizedTilted generalized_tilted(const SrSolution& sol);

/// Central finite differences of the minimal sum rate in (R1, D1, D2),
/// negated: an independent cross-check of the dual multipliers. Throws when a
/// stencil point crosses the infeasible boundary.
std::array<double, 3> multipliers_by_perturbation(const SourceInstance& inst, double R1,
                                                  double step = 1e-4);

struct RefinabilityResult {
    bool refinable = false;
    double r_y = 0;         // R_Y(P,D1)
    double r_z = 0;         // R_Z(P,D2)
    double sum_rate = 0;    // minimal sum rate at R1 = R_Y(P,D1)
    std::vector<std::vector<double>> witness;  // feasible P(y,z|x)
};

/// True iff the two-stage corner point loses nothing against the
/// single-decoder optimum for decoder 2 (tolerance 1e-6).
RefinabilityResult is_successively_refinable(const SourceInstance& inst);

struct SourceGradient {
    double derivative = 0;       // tilted_yz(a) - tilted_yz(b)
    double finite_difference = 0;
    bool support_stable = true;  // optimal support unchanged at stencil points
};

/// Directional derivative of Q_X -> minimal sum rate along e_a - e_b.
SourceGradient gradient_wrt_source(const SourceInstance& inst, double R1, std::size_t a,
                                   std::size_t b, double step = 1e-4);

}  // namespace srasym
