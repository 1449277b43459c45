#include "srasym/rd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace srasym {

namespace {

constexpr int kMaxSweeps = 100000;
constexpr double kPruneMass = 1e-14;

struct BaState {
    std::vector<double> q;                   // output law
    std::vector<std::vector<double>> chan;   // P(y|x)
    double expected_distortion = 0;
    double mutual_information = 0;           // nats
    std::vector<double> log_z;               // log sum_y q(y) exp(-s d(x,y))
    int sweeps = 0;
};

// Two-block alternating minimization of I(X;Y) + s E[d(X,Y)] at fixed slope.
// The after-channel-step objective is -sum_x p(x) log Z(x); it must not
// increase across sweeps.
BaState ba_at_slope(const Pmf& px, const DistortionMatrix& d, double s,
                    std::vector<double> q_init, double tol) {
    const std::size_t nx = d.rows(), ny = d.cols();
    BaState st;
    st.q = std::move(q_init);
    st.chan.assign(nx, std::vector<double>(ny, 0.0));
    st.log_z.assign(nx, 0.0);

    std::vector<double> q_new(ny, 0.0);
    double prev_obj = std::numeric_limits<double>::infinity();
    double change = std::numeric_limits<double>::infinity();

    for (int t = 0; t < kMaxSweeps; ++t) {
        double obj = 0;
        std::fill(q_new.begin(), q_new.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            double shift = std::numeric_limits<double>::infinity();
            for (std::size_t y = 0; y < ny; ++y)
                if (st.q[y] > 0) shift = std::min(shift, s * d(x, y));
            double z = 0;
            for (std::size_t y = 0; y < ny; ++y) {
                double w = st.q[y] > 0 ? st.q[y] * std::exp(shift - s * d(x, y)) : 0.0;
                st.chan[x][y] = w;
                z += w;
            }
            st.log_z[x] = std::log(z) - shift;
            double inv = 1.0 / z;
            for (std::size_t y = 0; y < ny; ++y) {
                st.chan[x][y] *= inv;
                q_new[y] += px[x] * st.chan[x][y];
            }
            obj -= px[x] * st.log_z[x];
        }
        if (obj > prev_obj + 1e-12)
            throw std::logic_error("alternating minimization objective increased");
        change = 0;
        for (std::size_t y = 0; y < ny; ++y)
            change = std::max(change, std::abs(q_new[y] - st.q[y]));
        st.q = q_new;
        st.sweeps = t + 1;
        bool settled = change < tol && std::abs(prev_obj - obj) < 1e-15 * (1.0 + std::abs(obj));
        prev_obj = obj;
        if (settled) break;
    }
    if (change > 1e-9) {
        std::ostringstream os;
        os << "rate-distortion solve did not converge after " << kMaxSweeps
           << " sweeps (gap=" << change << ")";
        throw std::runtime_error(os.str());
    }

    double ed = 0;
    double neg_log_z = 0;
    for (std::size_t x = 0; x < nx; ++x) {
        for (std::size_t y = 0; y < ny; ++y) ed += px[x] * st.chan[x][y] * d(x, y);
        neg_log_z -= px[x] * st.log_z[x];
    }
    st.expected_distortion = ed;
    st.mutual_information = neg_log_z - s * ed;
    return st;
}

RdSolution zero_rate_solution(const Pmf& px, const DistortionMatrix& d, double D) {
    RdSolution sol;
    const std::size_t nx = d.rows(), ny = d.cols();
    std::size_t best = d.best_column(px);
    sol.rate = 0;
    sol.slope = 0;
    sol.distortion_level = D;
    sol.output_law.assign(ny, 0.0);
    sol.output_law[best] = 1.0;
    sol.test_channel.assign(nx, sol.output_law);
    sol.tilted.assign(nx, 0.0);
    double ed = 0;
    for (std::size_t x = 0; x < nx; ++x) ed += px[x] * d(x, best);
    sol.achieved_distortion = ed;
    return sol;
}

}  // namespace

RdSolution rd_solve(const Pmf& px, const DistortionMatrix& d, double D) {
    if (px.size() != d.rows())
        throw std::invalid_argument("source law size does not match distortion rows");
    if (!(D > 0))
        throw std::invalid_argument("distortion level must be positive");

    const std::size_t ny = d.cols();
    const double d_max = d.min_expected(px);
    if (D >= d_max - 1e-15) return zero_rate_solution(px, d, D);

    // Outer bisection on the slope; distortion is non-increasing in s.
    std::vector<double> warm(ny, 1.0 / static_cast<double>(ny));
    double lo = 0.0, hi = 1.0;
    int total_sweeps = 0;
    for (;;) {
        BaState st = ba_at_slope(px, d, hi, warm, 1e-12);
        total_sweeps += st.sweeps;
        warm = st.q;
        if (st.expected_distortion <= D) break;
        hi *= 2;
        if (hi > 1e7)
            throw std::runtime_error("slope bracket expansion failed (distortion level too small?)");
    }
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        BaState st = ba_at_slope(px, d, mid, warm, 1e-12);
        total_sweeps += st.sweeps;
        warm = st.q;
        if (st.expected_distortion > D)
            lo = mid;
        else
            hi = mid;
    }

    const double s = 0.5 * (lo + hi);
    BaState st = ba_at_slope(px, d, s, warm, 1e-15);
    total_sweeps += st.sweeps;

    // A linear stretch of the rate-distortion curve makes the distortion jump
    // across the critical slope; the constrained optimum is then a mixture of
    // the two branch solutions. Time-share explicitly when the final solve
    // lands on the infeasible branch.
    if (st.expected_distortion > D + 1e-9) {
        std::vector<double> uniform(ny, 1.0 / static_cast<double>(ny));
        BaState low = st;  // higher-distortion branch (slope below critical)
        BaState high = st;
        bool have_high = false;
        for (double off = 1e-6; off <= 1e-2; off *= 10) {
            high = ba_at_slope(px, d, s + off, uniform, 1e-15);
            total_sweeps += high.sweeps;
            if (high.expected_distortion <= D) {
                have_high = true;
                break;
            }
        }
        if (!have_high)
            throw std::runtime_error("rate-distortion branch mixing failed to bracket the level");
        double t = (low.expected_distortion - D) /
                   (low.expected_distortion - high.expected_distortion);
        for (std::size_t y = 0; y < ny; ++y)
            st.q[y] = t * high.q[y] + (1 - t) * low.q[y];
        for (std::size_t x = 0; x < px.size(); ++x)
            for (std::size_t y = 0; y < ny; ++y)
                st.chan[x][y] = t * high.chan[x][y] + (1 - t) * low.chan[x][y];
        RdSolution sol;
        sol.slope = s;
        sol.distortion_level = D;
        sol.sweeps = total_sweeps;
        sol.test_channel = st.chan;
        double mass = 0;
        for (double& qv : st.q) {
            if (qv < kPruneMass) qv = 0;
            mass += qv;
        }
        for (double& qv : st.q) qv /= mass;
        sol.output_law = st.q;
        sol.tilted.assign(px.size(), 0.0);
        std::vector<double> marg(ny, 0.0);
        double ed = 0, mi = 0;
        for (std::size_t x = 0; x < px.size(); ++x)
            for (std::size_t y = 0; y < ny; ++y) marg[y] += px[x] * st.chan[x][y];
        for (std::size_t x = 0; x < px.size(); ++x) {
            double z = 0;
            for (std::size_t y = 0; y < ny; ++y) {
                double v = st.chan[x][y];
                ed += px[x] * v * d(x, y);
                if (v > 0) mi += px[x] * v * std::log(v / marg[y]);
                if (st.q[y] > 0) z += st.q[y] * std::exp(-s * d(x, y));
            }
            sol.tilted[x] = -s * D - std::log(z);
        }
        sol.achieved_distortion = ed;
        sol.rate = mi;
        return sol;
    }

    // Boundary supports are identified only asymptotically by the
    // multiplicative updates. Tentatively drop near-dead outputs, re-solve on
    // the reduced support and keep the result iff the dropped outputs satisfy
    // the optimality condition sum_x p(x) e^{-s d(x,y)} / Z(x) <= 1.
    for (int round = 0; round < 3; ++round) {
        std::vector<std::size_t> dropped;
        std::vector<double> q_red = st.q;
        double mass = 0;
        for (std::size_t y = 0; y < ny; ++y) {
            if (q_red[y] > 0 && q_red[y] < 1e-7) {
                q_red[y] = 0;
                dropped.push_back(y);
            }
            mass += q_red[y];
        }
        if (dropped.empty() || mass <= 0) break;
        for (double& qv : q_red) qv /= mass;
        BaState cand = ba_at_slope(px, d, s, q_red, 1e-15);
        total_sweeps += cand.sweeps;
        bool kkt_ok = true;
        for (std::size_t y : dropped) {
            double growth = 0;
            for (std::size_t x = 0; x < px.size(); ++x)
                growth += px[x] * std::exp(-s * d(x, y) - cand.log_z[x]);
            if (growth > 1.0 + 1e-9) kkt_ok = false;
        }
        if (!kkt_ok) break;
        st = cand;
    }

    // Prune vanishing outputs, then rebuild the channel from the pruned law.
    double mass = 0;
    for (double& qv : st.q) {
        if (qv < kPruneMass) qv = 0;
        mass += qv;
    }
    for (double& qv : st.q) qv /= mass;

    RdSolution sol;
    sol.slope = s;
    sol.distortion_level = D;
    sol.output_law = st.q;
    sol.sweeps = total_sweeps;
    sol.test_channel.assign(px.size(), std::vector<double>(ny, 0.0));
    sol.tilted.assign(px.size(), 0.0);
    double ed = 0, neg_log_z = 0;
    for (std::size_t x = 0; x < px.size(); ++x) {
        double shift = std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < ny; ++y)
            if (st.q[y] > 0) shift = std::min(shift, s * d(x, y));
        double z = 0;
        for (std::size_t y = 0; y < ny; ++y) {
            double w = st.q[y] > 0 ? st.q[y] * std::exp(shift - s * d(x, y)) : 0.0;
            sol.test_channel[x][y] = w;
            z += w;
        }
        double log_z = std::log(z) - shift;
        sol.tilted[x] = -s * D - log_z;
        for (std::size_t y = 0; y < ny; ++y) {
            sol.test_channel[x][y] /= z;
            ed += px[x] * sol.test_channel[x][y] * d(x, y);
        }
        neg_log_z -= px[x] * log_z;
    }
    sol.achieved_distortion = ed;
    sol.rate = neg_log_z - s * ed;
    return sol;
}

double tilted_density(const RdSolution& sol, std::size_t x) {
    if (x >= sol.tilted.size())
        throw std::out_of_range("symbol index out of range");
    return sol.tilted[x];
}

}  // namespace srasym
