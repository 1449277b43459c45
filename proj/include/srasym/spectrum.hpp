#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "srasym/core.hpp"
#include "srasym/sr.hpp"

namespace srasym {

/// Exact joint law of (sum of j_Y, sum of j_YZ) over an i.i.d. block: both
/// sums are linear in the empirical counts, so each composition of n
/// contributes a single atom with multinomial mass.
struct ExcessSpectrum {
    int n = 0;
    struct Atom {
        double a = 0, b = 0, mass = 0;
    };
    std::vector<Atom> support;
    double mass_defect = 0;  // |sum of masses - 1|
};

std::size_t composition_count(int n, std::size_t parts);

ExcessSpectrum build_spectrum(const Pmf& px, const std::vector<double>& jy,
                              const std::vector<double>& jyz, int n,
                              std::size_t cap = 5000000);
ExcessSpectrum build_spectrum(const SourceInstance& inst, double R1star, int n,
                              std::size_t cap = 5000000);

struct CodeParams {
    int n = 1;
    double logM1 = 0;     // nats
    double logM1M2 = 0;   // nats, >= logM1
    double gamma1 = 0, gamma2 = 0;
};

struct OneShotResult {
    double value = 0;   // clamped into [0,1]
    double raw = 0;     // before clamping
    double prob = 0;    // the excess probability term
    double std_error = 0;  // Monte Carlo only
};

/// Lower bound on the joint excess-distortion probability:
///   P(a >= logM1 + g1  or  b >= logM1M2 + g2) - e^{-g1} - e^{-g2}.
OneShotResult one_shot_converse(const ExcessSpectrum& spec, const CodeParams& cp);
OneShotResult one_shot_converse_mc(const Pmf& px, const std::vector<double>& jy,
                                   const std::vector<double>& jyz, const CodeParams& cp,
                                   std::uint64_t trials, std::uint64_t seed);

int c1_constant(std::size_t nx, std::size_t ny);
int c2_constant(std::size_t nx, std::size_t ny, std::size_t nz);

struct TypeSweepConfig {
    int n = 1;
    double logM1 = 0, logM1M2 = 0;
    int c1 = 0, c2 = 0;  // must equal the c1/c2 alphabet formulas
    enum class Mode { exact, monte_carlo } mode = Mode::exact;
    std::uint64_t trials = 0, seed = 0;
};

TypeSweepConfig make_sweep_config(const SourceInstance& inst, int n, double logM1,
                                  double logM1M2);
void validate_sweep_config(const SourceInstance& inst, const TypeSweepConfig& cfg);

/// Shared per-type memoization (concurrent insert-or-read, last writer wins).
class TypeSweepCache {
public:
    struct Entry {
        double ry = 0;
        bool sum_feasible = false;
        double sum_rate = 0;
        double lambda = 0, nu1 = 0, nu2 = 0;
    };
    std::optional<Entry> find(const std::string& key) const;
    void store(const std::string& key, const Entry& e);
    std::size_t hits() const { return hits_; }

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, Entry> map_;
    mutable std::size_t hits_ = 0;
};

struct TypeBoundResult {
    double value = 0;       // clamped into [0,1]
    double raw = 0;         // before clamping
    std::size_t types = 0;  // enumerated types
    double skipped_mass = 0;
    std::size_t cache_hits = 0;
};

/// Type-based achievability: mass of types whose corrected rates fall outside
/// the per-type region. Exact over types.
TypeBoundResult dms_achievability_bound(const SourceInstance& inst, const TypeSweepConfig& cfg,
                                        TypeSweepCache* cache = nullptr);

/// Type-based converse at inflated distortion levels D_i + max d_i / n and
/// rate inflation (|X| log(n+1) + 2 log n)/n, minus 1/n.
TypeBoundResult dms_converse_bound(const SourceInstance& inst, int n, double logM1,
                                   double logM1M2, TypeSweepCache* cache = nullptr);

struct MdcTrendPoint {
    int n = 0;
    double eps = 0;
    double normalized_exponent = 0;  // -log(eps) / (n rho_n^2)
    bool underflow = false;          // exponent is a lower bound
};

/// Exact excess probability at rates backed off by theta_i * rho_n, reported
/// as the normalized exponent sequence.
std::vector<MdcTrendPoint> mdc_trend(const SourceInstance& inst, const RatePoint& rates,
                                     double theta1, double theta2,
                                     const std::function<double(int)>& rho,
                                     const std::vector<int>& n_list);

}  // namespace srasym
