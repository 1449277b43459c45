#include "srasym/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "srasym/special.hpp"

namespace srasym {

GaussianInstance validate_gaussian(GaussianInstance inst) {
    if (!(inst.sigma2 > inst.D1 && inst.D1 > inst.D2 && inst.D2 > 0))
        throw std::invalid_argument("outside the assumed regime sigma^2 > D1 > D2 > 0");
    return inst;
}

GaussianInstance parse_gaussian_json(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(origin + ": invalid JSON (" + e.what() + ")");
    }
    GaussianInstance inst;
    for (const char* field : {"sigma2", "D1", "D2"}) {
        if (!j.contains(field) || !j[field].is_number())
            throw std::invalid_argument(origin + ": field \"" + std::string(field) +
                                        "\" must be a number");
    }
    inst.sigma2 = j["sigma2"].get<double>();
    inst.D1 = j["D1"].get<double>();
    inst.D2 = j["D2"].get<double>();
    try {
        return validate_gaussian(inst);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
}

GaussianInstance load_gaussian_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument(path + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_gaussian_json(os.str(), path);
}

double gaussian_rate(double sigma2, double D) {
    if (!(sigma2 > 0) || !(D > 0))
        throw std::invalid_argument("sigma2 and D must be positive");
    return 0.5 * std::log(std::max(1.0, sigma2 / D));
}

GaussianRd gaussian_rd(const GaussianInstance& inst) {
    GaussianRd rd;
    rd.sigma2 = inst.sigma2;
    rd.D1 = inst.D1;
    rd.D2 = inst.D2;
    rd.R1 = gaussian_rate(inst.sigma2, inst.D1);
    rd.R2 = gaussian_rate(inst.sigma2, inst.D2);
    return rd;
}

double rate_function(double xi) {
    if (xi < 0) throw std::invalid_argument("xi must be nonnegative");
    return 0.5 * (std::expm1(2.0 * xi) - 2.0 * xi);
}

double GaussianTypePartition::boundary(long long i) const {
    if (i < 0 || i > k) throw std::out_of_range("partition boundary index out of range");
    return sigma2 * std::exp(-2.0 * xi) + (static_cast<double>(i) - 1.0) * delta * sigma2;
}

GaussianTypePartition build_partition(double sigma2, double xi, double delta) {
    if (!(sigma2 > 0) || !(xi > 0) || !(delta > 0))
        throw std::invalid_argument("partition parameters must be positive");
    GaussianTypePartition p;
    p.sigma2 = sigma2;
    p.xi = xi;
    p.delta = delta;
    p.k = static_cast<long long>(std::ceil((std::exp(2.0 * xi) - std::exp(-2.0 * xi)) / delta)) + 1;
    return p;
}

GaussianTypePartition partition_preset(double sigma2, int n) {
    if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
    return build_partition(sigma2, std::pow(static_cast<double>(n), -1.0 / 3.0),
                           1.0 / static_cast<double>(n));
}

GaussianBound gaussian_achievability_bound(const GaussianInstance& inst, int n, double logM1,
                                           double logM1M2, double xi, double delta) {
    validate_gaussian(inst);
    if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
    if (logM1 > logM1M2) throw std::invalid_argument("logM1 must not exceed logM1M2");
    GaussianTypePartition part = build_partition(inst.sigma2, xi, delta);
    const double nn = n, log_n = std::log(nn), log6 = std::log(6.0);
    double r1n = (logM1 - 2.5 * log_n - std::log(static_cast<double>(part.k)) - log6) / nn;
    double r2n = (logM1M2 - 5.0 * log_n - 2.0 * log6) / nn;

    GaussianBound out;
    out.lead = 4.0 * std::exp(-nn * rate_function(xi));
    double t1 = inst.D1 / inst.sigma2 * std::exp(2.0 * r1n) - delta;
    double t2 = inst.D2 / inst.sigma2 * std::exp(2.0 * r2n) - delta;
    double t = std::min(t1, t2);
    if (t <= 0) {
        out.vacuous = true;
        out.raw = 1.0;
        out.value = 1.0;
        return out;
    }
    out.raw = out.lead + chi_square_upper_tail(nn, nn * t);
    out.value = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

OneShotResult gaussian_one_shot_converse(const GaussianInstance& inst, const CodeParams& cp) {
    validate_gaussian(inst);
    if (cp.logM1 > cp.logM1M2)
        throw std::invalid_argument("logM1 must not exceed logM1M2");
    if (cp.gamma1 < 0 || cp.gamma2 < 0)
        throw std::invalid_argument("gamma thresholds must be nonnegative");
    GaussianRd rd = gaussian_rd(inst);
    const double nn = cp.n;
    // sum_i j(X_i) = n R + (W - n)/2 with W ~ chi^2_n, so both excess events
    // are tails of the same statistic.
    double w1 = nn + 2.0 * (cp.logM1 + cp.gamma1 - nn * rd.R1);
    double w2 = nn + 2.0 * (cp.logM1M2 + cp.gamma2 - nn * rd.R2);
    double w = std::min(w1, w2);
    OneShotResult r;
    r.prob = w <= 0 ? 1.0 : chi_square_upper_tail(nn, w);
    r.raw = r.prob - std::exp(-cp.gamma1) - std::exp(-cp.gamma2);
    r.value = std::clamp(r.raw, 0.0, 1.0);
    return r;
}

RegionBoundary gaussian_region(const GaussianInstance& inst, CaseTag tag, double epsilon) {
    validate_gaussian(inst);
    if (!(epsilon > 0 && epsilon < 1))
        throw std::invalid_argument("epsilon must lie strictly inside (0,1)");
    const double corner = std::sqrt(0.5) * q_inv(epsilon);
    RegionBoundary out;
    out.corner = corner;
    if (tag == CaseTag::i) {
        out.closed_form = "half-plane";
        for (int i = 0; i < 40; ++i) out.points.push_back({corner - 0.5 + i * 0.25, corner});
        return out;
    }
    if (tag == CaseTag::ii) {
        out.closed_form = "half-plane";
        for (int i = 0; i < 40; ++i) out.points.push_back({corner, 6.0 - i * 0.25});
        return out;
    }
    out.closed_form = "rectangle";
    for (int i = 0; i <= 24; ++i) out.points.push_back({corner, corner + 6.0 * (24 - i) / 24.0});
    for (int i = 1; i <= 24; ++i) out.points.push_back({corner + 6.0 * i / 24.0, corner});
    return out;
}

double gaussian_mdc(double theta1, double theta2, CaseTag tag) {
    if (!(theta1 > 0) || !(theta2 > 0))
        throw std::invalid_argument("theta parameters must be positive");
    switch (tag) {
        case CaseTag::i: return theta2 * theta2;
        case CaseTag::ii: return theta1 * theta1;
        default: return std::min(theta1 * theta1, theta2 * theta2);
    }
}

std::vector<MdcTrendPoint> gaussian_mdc_trend(const GaussianInstance& inst, double theta1,
                                              double theta2,
                                              const std::function<double(int)>& rho,
                                              const std::vector<int>& n_list) {
    validate_gaussian(inst);
    if (!(theta1 > 0) || !(theta2 > 0))
        throw std::invalid_argument("theta parameters must be positive");
    const double theta_min = std::min(theta1, theta2);
    std::vector<MdcTrendPoint> out;
    for (int n : n_list) {
        double r = rho(n);
        double eps = chi_square_upper_tail(n, n * (1.0 + 2.0 * theta_min * r));
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
