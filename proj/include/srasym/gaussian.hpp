#pragma once

#include <functional>
#include <string>
#include <vector>

#include "srasym/normal.hpp"
#include "srasym/spectrum.hpp"

namespace srasym {

/// Gaussian memoryless source with quadratic distortion at both decoders,
/// restricted to the regime sigma^2 > D1 > D2 > 0.
struct GaussianInstance {
    double sigma2 = 1;
    double D1 = 0.25;
    double D2 = 0.0625;
};

GaussianInstance validate_gaussian(GaussianInstance inst);
GaussianInstance load_gaussian_json(const std::string& path);
GaussianInstance parse_gaussian_json(const std::string& text, const std::string& origin);

/// Rate 0.5 log+(sigma2 / D), nats.
double gaussian_rate(double sigma2, double D);

/// Closed-form rates and tilted densities; both dispersions equal 1/2.
struct GaussianRd {
    double sigma2 = 1, D1 = 0, D2 = 0;
    double R1 = 0, R2 = 0;
    double variance = 0.5;  // nats^2
    double jy(double x) const { return R1 + 0.5 * (x * x / sigma2 - 1.0); }
    double jz(double x) const { return R2 + 0.5 * (x * x / sigma2 - 1.0); }
};
GaussianRd gaussian_rd(const GaussianInstance& inst);

/// Large-deviations rate function of the squared standard normal,
/// I(xi) = (e^{2 xi} - 1 - 2 xi) / 2.
double rate_function(double xi);

/// Quantization of the empirical power into k cells of width delta*sigma^2
/// starting at sigma^2 e^{-2 xi}.
struct GaussianTypePartition {
    double sigma2 = 1, xi = 0, delta = 0;
    long long k = 0;
    double boundary(long long i) const;  // i in [0:k]
};
GaussianTypePartition build_partition(double sigma2, double xi, double delta);
/// Preset xi = n^{-1/3}, delta = 1/n.
GaussianTypePartition partition_preset(double sigma2, int n);

struct GaussianBound {
    double value = 0;   // clamped into [0,1]
    double raw = 0;
    double lead = 0;    // the 4 exp(-n I(xi)) term
    bool vacuous = false;
};

/// Covering-based achievability bound: 4 e^{-n I(xi)} plus the chi-square
/// tail beyond the smaller of the two corrected-rate thresholds.
GaussianBound gaussian_achievability_bound(const GaussianInstance& inst, int n, double logM1,
                                           double logM1M2, double xi, double delta);

/// One-shot converse specialized to the Gaussian tilted densities: the two
/// sums are affine in the same chi-square statistic, so the bound is an exact
/// tail value.
OneShotResult gaussian_one_shot_converse(const GaussianInstance& inst, const CodeParams& cp);

RegionBoundary gaussian_region(const GaussianInstance& inst, CaseTag tag, double epsilon);
double gaussian_mdc(double theta1, double theta2, CaseTag tag);

std::vector<MdcTrendPoint> gaussian_mdc_trend(const GaussianInstance& inst, double theta1,
                                              double theta2,
                                              const std::function<double(int)>& rho,
                                              const std::vector<int>& n_list);

}  // namespace srasym
