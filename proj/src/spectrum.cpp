#include "srasym/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "srasym/parallel.hpp"
#include "srasym/rd.hpp"
#include "srasym/rng.hpp"

namespace srasym {

namespace {

template <typename Fn>
void compose_rec(int pos, int remaining, std::vector<int>& k, const Fn& fn) {
    if (pos + 1 == static_cast<int>(k.size())) {
        k[pos] = remaining;
        fn(k);
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        k[pos] = v;
        compose_rec(pos + 1, remaining - v, k, fn);
    }
}

template <typename Fn>
void for_each_composition(int n, std::size_t parts, const Fn& fn) {
    std::vector<int> k(parts, 0);
    if (parts == 1) {
        k[0] = n;
        fn(k);
        return;
    }
    compose_rec(0, n, k, fn);
}

std::string type_key(const std::vector<int>& counts, double r1n, double d1_level,
                     double d2_level) {
    std::string s;
    for (int c : counts) {
        s += std::to_string(c);
        s += ',';
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "|%a|%a|%a", r1n, d1_level, d2_level);
    s += buf;
    return s;
}

struct SweepSetup {
    int n;
    double r1n, r2n;       // corrected rates, nats/symbol
    double d1_level, d2_level;
    double subtract;       // constant subtracted from the probability
};

// Per-type region test shared by the exact enumeration and the Monte Carlo
// sampler. An infeasible sum rate counts as +infinity.
class TypeEvaluator {
public:
    TypeEvaluator(const SourceInstance& inst, const SweepSetup& su, TypeSweepCache* cache)
        : inst_(inst), su_(su), cache_(cache) {
        opts_.restart_check = false;
        double ry0 = rd_solve(inst.px, inst.d1, su.d1_level).rate;
        SourceInstance level_inst = inst;
        level_inst.D1 = su.d1_level;
        level_inst.D2 = su.d2_level;
        SrSolution s0 = sr_solve(level_inst, std::max(su.r1n, ry0), opts_);
        if (s0.feasible) opts_.warm_multipliers = {{s0.lambda, s0.nu1, s0.nu2}};
    }

    bool violated(const std::vector<int>& counts) {
        std::string key = type_key(counts, su_.r1n, su_.d1_level, su_.d2_level);
        TypeSweepCache::Entry entry;
        bool from_cache = false;
        if (cache_) {
            if (auto hit = cache_->find(key)) {
                entry = *hit;
                from_cache = true;
                hits_.fetch_add(1);
            }
        }
        if (!from_cache) {
            std::vector<double> q(counts.size());
            for (std::size_t x = 0; x < counts.size(); ++x)
                q[x] = static_cast<double>(counts[x]) / su_.n;
            Pmf qx{q};
            entry.ry = rd_solve(qx, inst_.d1, su_.d1_level).rate;
            if (su_.r1n < entry.ry - 1e-9) {
                entry.sum_feasible = false;
            } else {
                SourceInstance type_inst{qx, inst_.d1, inst_.d2, su_.d1_level, su_.d2_level};
                SrSolution s = sr_solve(type_inst, su_.r1n, opts_);
                entry.sum_feasible = s.feasible;
                entry.sum_rate = s.value;
                entry.lambda = s.lambda;
                entry.nu1 = s.nu1;
                entry.nu2 = s.nu2;
            }
            if (cache_) cache_->store(key, entry);
        }
        if (su_.r1n < entry.ry) return true;
        return !entry.sum_feasible || su_.r2n < entry.sum_rate;
    }

    std::size_t hits() const { return hits_.load(); }

private:
    const SourceInstance& inst_;
    const SweepSetup& su_;
    TypeSweepCache* cache_;
    SrOptions opts_;
    std::atomic<std::size_t> hits_{0};
};

TypeBoundResult run_type_sweep(const SourceInstance& inst, const SweepSetup& su,
                               TypeSweepCache* cache) {
    const std::size_t m = inst.px.size();
    std::size_t total = composition_count(su.n, m);

    std::vector<std::vector<int>> types;
    types.reserve(total);
    for_each_composition(su.n, m, [&](const std::vector<int>& k) { types.push_back(k); });

    std::vector<double> log_fact(su.n + 1);
    for (int i = 1; i <= su.n; ++i) log_fact[i] = std::lgamma(static_cast<double>(i) + 1.0);
    std::vector<double> log_p(m);
    for (std::size_t x = 0; x < m; ++x)
        log_p[x] = inst.px[x] > 0 ? std::log(inst.px[x]) : -std::numeric_limits<double>::infinity();

    TypeEvaluator eval(inst, su, cache);
    std::vector<double> contrib(types.size(), 0.0);
    std::vector<char> skipped(types.size(), 0);
    std::vector<double> masses(types.size(), 0.0);

    parallel_for(types.size(), [&](std::size_t idx) {
        const std::vector<int>& k = types[idx];
        double log_mass = log_fact[su.n];
        bool impossible = false;
        for (std::size_t x = 0; x < m; ++x) {
            if (k[x] == 0) continue;
            if (inst.px[x] <= 0) {
                impossible = true;
                break;
            }
            log_mass += k[x] * log_p[x] - log_fact[k[x]];
        }
        double mass = impossible ? 0.0 : std::exp(log_mass);
        masses[idx] = mass;
        if (mass < 1e-15) {
            skipped[idx] = 1;
            return;
        }
        if (eval.violated(k)) contrib[idx] = mass;
    });

    TypeBoundResult out;
    out.types = types.size();
    out.cache_hits = eval.hits();
    double p = 0;
    for (std::size_t i = 0; i < types.size(); ++i) {
        p += contrib[i];
        if (skipped[i]) out.skipped_mass += masses[i];
    }
    out.raw = p - su.subtract;
    out.value = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

TypeBoundResult run_type_sweep_mc(const SourceInstance& inst, const SweepSetup& su,
                                  TypeSweepCache* cache, std::uint64_t trials,
                                  std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    TypeSweepCache local;
    if (!cache) cache = &local;  // sampled types repeat; always memoize
    TypeEvaluator eval(inst, su, cache);
    DiscreteSampler sampler(inst.px.probs());
    std::vector<char> hit(trials, 0);
    parallel_for(trials, [&](std::size_t trial) {
        Xoshiro256 rng = trial_rng(seed, trial);
        std::vector<int> counts(inst.px.size(), 0);
        for (int i = 0; i < su.n; ++i) ++counts[sampler(rng)];
        hit[trial] = eval.violated(counts) ? 1 : 0;
    });
    double count = 0;
    for (char h : hit) count += h;
    TypeBoundResult out;
    out.types = trials;
    out.cache_hits = eval.hits();
    out.raw = count / static_cast<double>(trials) - su.subtract;
    out.value = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

}  // namespace

std::size_t composition_count(int n, std::size_t parts) {
    double lg = std::lgamma(static_cast<double>(n) + parts) -
                std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(parts));
    double c = std::exp(lg);
    if (c > 4.5e15) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(std::llround(c));
}

ExcessSpectrum build_spectrum(const Pmf& px, const std::vector<double>& jy,
                              const std::vector<double>& jyz, int n, std::size_t cap) {
    if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
    const std::size_t m = px.size();
    if (jy.size() != m || jyz.size() != m)
        throw std::invalid_argument("tilted vectors must match the source alphabet");
    std::size_t total = composition_count(n, m);
    if (total > cap) {
        std::ostringstream os;
        os << "composition count " << total << " exceeds cap " << cap
           << "; use the Monte Carlo mode";
        throw std::runtime_error(os.str());
    }

    std::vector<double> log_fact(n + 1);
    for (int i = 1; i <= n; ++i) log_fact[i] = std::lgamma(static_cast<double>(i) + 1.0);
    std::vector<double> log_p(m);
    for (std::size_t x = 0; x < m; ++x)
        log_p[x] = px[x] > 0 ? std::log(px[x]) : -std::numeric_limits<double>::infinity();

    ExcessSpectrum spec;
    spec.n = n;
    spec.support.reserve(total);
    double mass_sum = 0;
    for_each_composition(n, m, [&](const std::vector<int>& k) {
        double a = 0, b = 0, log_mass = log_fact[n];
        bool impossible = false;
        for (std::size_t x = 0; x < m; ++x) {
            a += k[x] * jy[x];
            b += k[x] * jyz[x];
            if (k[x] == 0) continue;
            if (px[x] <= 0) {
                impossible = true;
                continue;
            }
            log_mass += k[x] * log_p[x] - log_fact[k[x]];
        }
        double mass = impossible ? 0.0 : std::exp(log_mass);
        mass_sum += mass;
        spec.support.push_back({a, b, mass});
    });
    spec.mass_defect = std::abs(mass_sum - 1.0);
    if (spec.mass_defect > 1e-10)
        throw std::logic_error("spectrum masses failed the normalization check");
    return spec;
}

ExcessSpectrum build_spectrum(const SourceInstance& inst, double R1star, int n, std::size_t cap) {
    RdSolution rd1 = rd_solve(inst.px, inst.d1, inst.D1);
    SrSolution sr = sr_solve(inst, R1star);
    if (!sr.feasible)
        throw std::runtime_error("spectrum requires a feasible rate point");
    return build_spectrum(inst.px, rd1.tilted, sr.tilted_yz, n, cap);
}

OneShotResult one_shot_converse(const ExcessSpectrum& spec, const CodeParams& cp) {
    if (cp.logM1 > cp.logM1M2)
        throw std::invalid_argument("logM1 must not exceed logM1M2");
    if (cp.gamma1 < 0 || cp.gamma2 < 0)
        throw std::invalid_argument("gamma thresholds must be nonnegative");
    double p = 0;
    const double t1 = cp.logM1 + cp.gamma1, t2 = cp.logM1M2 + cp.gamma2;
    for (const auto& atom : spec.support)
        if (atom.a >= t1 || atom.b >= t2) p += atom.mass;
    OneShotResult r;
    r.prob = p;
    r.raw = p - std::exp(-cp.gamma1) - std::exp(-cp.gamma2);
    r.value = std::clamp(r.raw, 0.0, 1.0);
    return r;
}

OneShotResult one_shot_converse_mc(const Pmf& px, const std::vector<double>& jy,
                                   const std::vector<double>& jyz, const CodeParams& cp,
                                   std::uint64_t trials, std::uint64_t seed) {
    if (cp.logM1 > cp.logM1M2)
        throw std::invalid_argument("logM1 must not exceed logM1M2");
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    const double t1 = cp.logM1 + cp.gamma1, t2 = cp.logM1M2 + cp.gamma2;
    DiscreteSampler sampler(px.probs());
    std::vector<char> hit(trials, 0);
    parallel_for(trials, [&](std::size_t trial) {
        Xoshiro256 rng = trial_rng(seed, trial);
        double a = 0, b = 0;
        for (int i = 0; i < cp.n; ++i) {
            std::size_t x = sampler(rng);
            a += jy[x];
            b += jyz[x];
        }
        hit[trial] = (a >= t1 || b >= t2) ? 1 : 0;
    });
    double count = 0;
    for (char h : hit) count += h;
    double p = count / static_cast<double>(trials);
    OneShotResult r;
    r.prob = p;
    r.raw = p - std::exp(-cp.gamma1) - std::exp(-cp.gamma2);
    r.value = std::clamp(r.raw, 0.0, 1.0);
    r.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
    return r;
}

int c1_constant(std::size_t nx, std::size_t ny) { return static_cast<int>(4 * nx * ny + 9); }

int c2_constant(std::size_t nx, std::size_t ny, std::size_t nz) {
    return static_cast<int>(6 * nx * ny * nz + 2 * nx * ny + 17);
}

TypeSweepConfig make_sweep_config(const SourceInstance& inst, int n, double logM1,
                                  double logM1M2) {
    TypeSweepConfig cfg;
    cfg.n = n;
    cfg.logM1 = logM1;
    cfg.logM1M2 = logM1M2;
    cfg.c1 = c1_constant(inst.px.size(), inst.d1.cols());
    cfg.c2 = c2_constant(inst.px.size(), inst.d1.cols(), inst.d2.cols());
    return cfg;
}

void validate_sweep_config(const SourceInstance& inst, const TypeSweepConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("blocklength must be >= 1");
    if (cfg.logM1 > cfg.logM1M2)
        throw std::invalid_argument("logM1 must not exceed logM1M2");
    if (cfg.c1 != c1_constant(inst.px.size(), inst.d1.cols()) ||
        cfg.c2 != c2_constant(inst.px.size(), inst.d1.cols(), inst.d2.cols()))
        throw std::invalid_argument("c1/c2 do not match the alphabet-size formulas");
}

std::optional<TypeSweepCache::Entry> TypeSweepCache::find(const std::string& key) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    ++hits_;
    return it->second;
}

void TypeSweepCache::store(const std::string& key, const Entry& e) {
    std::lock_guard<std::mutex> lk(mu_);
    map_[key] = e;
}

TypeBoundResult dms_achievability_bound(const SourceInstance& inst, const TypeSweepConfig& cfg,
                                        TypeSweepCache* cache) {
    validate_sweep_config(inst, cfg);
    const double n = cfg.n;
    const double log_n = std::log(n), log_n1 = std::log(n + 1.0);
    SweepSetup su;
    su.n = cfg.n;
    su.r1n = (cfg.logM1 - cfg.c1 * log_n - inst.px.size() * log_n1) / n;
    su.r2n = (cfg.logM1M2 - cfg.c2 * log_n) / n;
    su.d1_level = inst.D1;
    su.d2_level = inst.D2;
    su.subtract = 0;
    if (cfg.mode == TypeSweepConfig::Mode::monte_carlo)
        return run_type_sweep_mc(inst, su, cache, cfg.trials, cfg.seed);
    return run_type_sweep(inst, su, cache);
}

TypeBoundResult dms_converse_bound(const SourceInstance& inst, int n, double logM1,
                                   double logM1M2, TypeSweepCache* cache) {
    if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
    if (logM1 > logM1M2) throw std::invalid_argument("logM1 must not exceed logM1M2");
    const double beta = inst.px.size() * std::log(n + 1.0) + 2.0 * std::log(static_cast<double>(n));
    SweepSetup su;
    su.n = n;
    su.r1n = (logM1 + beta) / n;
    su.r2n = (logM1M2 + beta) / n;
    su.d1_level = inst.D1 + inst.d1.max_value() / n;
    su.d2_level = inst.D2 + inst.d2.max_value() / n;
    su.subtract = 1.0 / n;
    return run_type_sweep(inst, su, cache);
}

std::vector<MdcTrendPoint> mdc_trend(const SourceInstance& inst, const RatePoint& rates,
                                     double theta1, double theta2,
                                     const std::function<double(int)>& rho,
                                     const std::vector<int>& n_list) {
    if (!(theta1 > 0) || !(theta2 > 0))
        throw std::invalid_argument("theta parameters must be positive");
    RdSolution rd1 = rd_solve(inst.px, inst.d1, inst.D1);
    SrSolution sr = sr_solve(inst, rates.R1);
    if (!sr.feasible)
        throw std::runtime_error("moderate-deviations trend requires a feasible rate point");

    std::vector<MdcTrendPoint> out;
    for (int n : n_list) {
        ExcessSpectrum spec = build_spectrum(inst.px, rd1.tilted, sr.tilted_yz, n);
        double r = rho(n);
        double t1 = n * (rates.R1 + theta1 * r);
        double t2 = n * (rates.R2 + theta2 * r);
        double eps = 0;
        for (const auto& atom : spec.support)
            if (atom.a >= t1 || atom.b >= t2) eps += atom.mass;
        MdcTrendPoint pt;
        pt.n = n;
        pt.eps = eps;
        if (eps < 1e-300) {
            pt.underflow = true;
            pt.normalized_exponent = 300.0 * std::log(10.0) / (n * r * r);
        } else {
            pt.normalized_exponent = -std::log(eps) / (n * r * r);
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace srasym
