// Command-line front end: loads instances, dispatches subcommands and emits
// JSON/CSV artifacts with deterministic formatting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "srasym/core.hpp"
#include "srasym/dispersion.hpp"
#include "srasym/gaussian.hpp"
#include "srasym/normal.hpp"
#include "srasym/rd.hpp"
#include "srasym/spectrum.hpp"
#include "srasym/sr.hpp"

using json = nlohmann::ordered_json;
using namespace srasym;

namespace {

constexpr double kLog2E = 1.4426950408889634074;  // bits per nat

struct OutputOptions {
    std::string out;     // empty: stdout
    std::string format;  // json | csv
    std::string units;   // nats | bits
    double rate_factor() const { return units == "bits" ? kLog2E : 1.0; }
};

void add_output_flags(CLI::App* cmd, OutputOptions& oo, const std::string& def_format,
                      const std::string& def_units) {
    oo.format = def_format;
    oo.units = def_units;
    cmd->add_option("--out", oo.out, "output path (default: stdout)");
    cmd->add_option("--format", oo.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--units", oo.units, "nats|bits")->check(CLI::IsMember({"nats", "bits"}));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void write_text(const OutputOptions& oo, const std::string& text) {
    if (oo.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(oo.out, std::ios::binary);
    if (!f) throw std::runtime_error(oo.out + ": cannot open for writing");
    f << text;
}

void emit_json(const OutputOptions& oo, const json& j) {
    if (oo.format == "csv")
        throw std::invalid_argument("csv format is not supported for this subcommand");
    write_text(oo, j.dump(2) + "\n");
}

std::string csv_of_points(const std::vector<BoundaryPoint>& pts, double factor) {
    std::string s = "L1,L2\n";
    for (const auto& p : pts) s += fmt(p.l1 * factor) + "," + fmt(p.l2 * factor) + "\n";
    return s;
}

json channel_json(const std::vector<std::vector<double>>& chan) {
    json rows = json::array();
    for (const auto& r : chan) rows.push_back(r);
    return rows;
}

// Corner rate used as the default anchor for dispersion and region queries.
double default_r1(const SourceInstance& inst) {
    return rd_solve(inst.px, inst.d1, inst.D1).rate;
}

int run_rd(const std::string& instance_path, int decoder, const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    const DistortionMatrix& d = decoder == 2 ? inst.d2 : inst.d1;
    double level = decoder == 2 ? inst.D2 : inst.D1;
    RdSolution sol = rd_solve(inst.px, d, level);
    double f = oo.rate_factor();
    json j;
    j["rate"] = sol.rate * f;
    j["slope"] = sol.slope * f;
    j["achieved_distortion"] = sol.achieved_distortion;
    j["output_law"] = sol.output_law;
    json tilted = json::array();
    for (double t : sol.tilted) tilted.push_back(t * f);
    j["tilted"] = tilted;
    j["test_channel"] = channel_json(sol.test_channel);
    j["units"] = oo.units;
    emit_json(oo, j);
    return 0;
}

int run_sr(const std::string& instance_path, double r1, const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    SrSolution sol = sr_solve(inst, r1);
    double f = oo.rate_factor();
    json j;
    if (!sol.feasible) {
        j["value"] = "infeasible";
        emit_json(oo, j);
        return 0;
    }
    j["value"] = sol.value * f;
    j["lambda"] = sol.lambda;
    j["nu1"] = sol.nu1;
    j["nu2"] = sol.nu2;
    json tilted = json::array();
    for (double t : sol.tilted_yz) tilted.push_back(t * f);
    j["tilted_yz"] = tilted;
    j["test_channel"] = channel_json(sol.test_channel);
    j["active"] = {{"rate", sol.active.rate}, {"d1", sol.active.d1}, {"d2", sol.active.d2}};
    j["diagnostics"] = {{"dual_value", sol.dual_value * f},
                        {"primal_value", sol.primal_value * f},
                        {"gap", sol.gap * f}};
    j["units"] = oo.units;
    emit_json(oo, j);
    return 0;
}

json dispersion_json(const DispersionReport& rep, double f) {
    double f2 = f * f;
    json j;
    j["v_d1"] = rep.v_d1 * f2;
    j["v_d2"] = rep.v_d2 * f2;
    j["v_joint"] = rep.v_joint * f2;
    j["covariance"] = rep.covariance * f2;
    j["matrix"] = {{rep.matrix[0][0] * f2, rep.matrix[0][1] * f2},
                   {rep.matrix[1][0] * f2, rep.matrix[1][1] * f2}};
    j["t_joint"] = rep.t_joint * f * f2;
    j["rank"] = rep.rank;
    j["min_eigenvalue"] = rep.min_eigenvalue * f2;
    j["lambda"] = rep.lambda;
    return j;
}

int run_dispersion(const std::string& instance_path, std::optional<double> r1,
                   const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    double r1v = r1 ? *r1 : default_r1(inst);
    DispersionReport rep = dispersion_report(inst, r1v);
    json j = dispersion_json(rep, oo.rate_factor());
    j["R1"] = r1v * oo.rate_factor();
    j["units"] = oo.units;
    emit_json(oo, j);
    return 0;
}

int run_region(const std::string& instance_path, const std::string& case_tag, double epsilon,
               std::optional<double> r1, const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    double r1v = r1 ? *r1 : default_r1(inst);
    DispersionReport rep = dispersion_report(inst, r1v);
    RegionQuery q{parse_case_tag(case_tag), epsilon, rep, rep.lambda, {}};
    RegionBoundary b = second_order_region(q);
    double f = oo.rate_factor();
    if (oo.format == "csv") {
        write_text(oo, csv_of_points(b.points, f));
    } else {
        json j;
        j["closed_form"] = b.closed_form;
        j["corner"] = b.corner * f;
        json pts = json::array();
        for (const auto& p : b.points) pts.push_back({p.l1 * f, p.l2 * f});
        j["points"] = pts;
        j["units"] = oo.units;
        emit_json(oo, j);
    }
    return 0;
}

int run_mdc(const std::string& instance_path, const std::string& case_tag, double theta1,
            double theta2, std::optional<double> r1, const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    double r1v = r1 ? *r1 : default_r1(inst);
    DispersionReport rep = dispersion_report(inst, r1v);
    MdcQuery q{theta1, theta2, rep, rep.lambda};
    json j;
    j["nu_star"] = mdc_constant(q, parse_case_tag(case_tag));
    j["case"] = case_tag;
    emit_json(oo, j);
    return 0;
}

int run_bounds(const std::string& instance_path, int n, double logM1, double logM1M2,
               const std::string& mode, std::uint64_t trials, std::uint64_t seed,
               const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    RdSolution rd1 = rd_solve(inst.px, inst.d1, inst.D1);
    double r1_star = rd1.rate;
    SrSolution sr = sr_solve(inst, r1_star);
    if (!sr.feasible) throw std::runtime_error("corner rate point is infeasible");

    TypeSweepCache cache;
    TypeSweepConfig cfg = make_sweep_config(inst, n, logM1, logM1M2);
    if (mode == "mc") {
        cfg.mode = TypeSweepConfig::Mode::monte_carlo;
        cfg.trials = trials;
        cfg.seed = seed;
    }
    TypeBoundResult ach = dms_achievability_bound(inst, cfg, &cache);
    TypeBoundResult conv = dms_converse_bound(inst, n, logM1, logM1M2, &cache);

    const double gamma = 0.5 * std::log(static_cast<double>(n));
    CodeParams cp{n, logM1, logM1M2, gamma, gamma};
    OneShotResult os;
    double mass_defect = 0;
    if (mode == "exact") {
        ExcessSpectrum spec = build_spectrum(inst.px, rd1.tilted, sr.tilted_yz, n);
        os = one_shot_converse(spec, cp);
        mass_defect = spec.mass_defect;
    } else {
        os = one_shot_converse_mc(inst.px, rd1.tilted, sr.tilted_yz, cp, trials, seed);
    }

    // Normal approximation of the achievability event, linearized at the
    // corner rate pair.
    DispersionReport rep = dispersion_from_tilted(
        inst.px, rd1.tilted, rd_solve(inst.px, inst.d2, inst.D2).tilted, sr.tilted_yz);
    double r1n = (logM1 - cfg.c1 * std::log(static_cast<double>(n)) -
                  inst.px.size() * std::log(n + 1.0)) /
                 n;
    double r2n = (logM1M2 - cfg.c2 * std::log(static_cast<double>(n))) / n;
    double z1 = std::sqrt(static_cast<double>(n)) * (r1n - r1_star);
    double z2 =
        std::sqrt(static_cast<double>(n)) * (r2n - sr.value + sr.lambda * (r1n - r1_star));
    Cov2 cov{rep.v_d1, rep.covariance, rep.v_joint};
    double approx = 0.0;
    if (cov.rank() > 0)
        approx = std::min(1.0, std::max(0.0, 1.0 - bivariate_psi(z1, z2, cov)));

    json j;
    j["achievability"] = ach.value;
    j["converse"] = conv.value;
    j["one_shot"] = os.value;
    j["gaussian_approx"] = approx;
    j["diagnostics"] = {{"achievability_raw", ach.raw},
                        {"converse_raw", conv.raw},
                        {"one_shot_raw", os.raw},
                        {"one_shot_prob", os.prob},
                        {"one_shot_std_error", os.std_error},
                        {"types", ach.types},
                        {"skipped_mass", ach.skipped_mass},
                        {"cache_hits", conv.cache_hits},
                        {"spectrum_mass_defect", mass_defect},
                        {"R1_star", r1_star},
                        {"R2_star", sr.value},
                        {"effective_L1", z1},
                        {"effective_L2", z2}};
    emit_json(oo, j);
    return 0;
}

int run_figure1(const std::string& instance_path, int points, double dmax,
                const OutputOptions& oo) {
    SourceInstance inst = load_instance_json(instance_path);
    std::string csv = "D,V\n";
    double f2 = oo.rate_factor() * oo.rate_factor();
    for (int i = 1; i <= points; ++i) {
        double d = dmax * i / (points + 1.0);
        RdSolution sol = rd_solve(inst.px, inst.d1, d);
        double mean = 0, var = 0;
        for (std::size_t x = 0; x < inst.px.size(); ++x) mean += inst.px[x] * sol.tilted[x];
        for (std::size_t x = 0; x < inst.px.size(); ++x)
            var += inst.px[x] * (sol.tilted[x] - mean) * (sol.tilted[x] - mean);
        csv += fmt(d) + "," + fmt(var * f2) + "\n";
    }
    write_text(oo, csv);
    return 0;
}

int run_figure2(const std::string& instance_path, const std::string& out_prefix, double epsilon,
                const OutputOptions& oo) {
    SourceInstance base = load_instance_json(instance_path);
    double f = oo.rate_factor();
    for (double d1 : {0.5, 0.55, 0.6}) {
        SourceInstance inst = base;
        inst.D1 = d1;
        inst.D2 = 0.3;
        double r1 = default_r1(inst);
        DispersionReport rep = dispersion_report(inst, r1);
        RegionQuery q{CaseTag::iii, epsilon, rep, rep.lambda, {}};
        RegionBoundary b = second_order_region(q);
        char name[128];
        std::snprintf(name, sizeof name, "%s_d1_%.2f.csv", out_prefix.c_str(), d1);
        OutputOptions file_oo = oo;
        file_oo.out = name;
        write_text(file_oo, csv_of_points(b.points, f));
    }
    return 0;
}

int run_gaussian(const std::string& instance_path, const std::string& task,
                 const std::string& case_tag, double epsilon, double theta1, double theta2,
                 int n, double logM1, double logM1M2, const OutputOptions& oo) {
    GaussianInstance inst = load_gaussian_json(instance_path);
    double f = oo.rate_factor();
    if (task == "rd") {
        GaussianRd rd = gaussian_rd(inst);
        json j;
        j["R1"] = rd.R1 * f;
        j["R2"] = rd.R2 * f;
        j["variance"] = rd.variance * f * f;
        j["units"] = oo.units;
        emit_json(oo, j);
        return 0;
    }
    if (task == "region") {
        RegionBoundary b = gaussian_region(inst, parse_case_tag(case_tag), epsilon);
        if (oo.format == "csv") {
            write_text(oo, csv_of_points(b.points, f));
        } else {
            json j;
            j["closed_form"] = b.closed_form;
            j["corner"] = b.corner * f;
            json pts = json::array();
            for (const auto& p : b.points) pts.push_back({p.l1 * f, p.l2 * f});
            j["points"] = pts;
            emit_json(oo, j);
        }
        return 0;
    }
    if (task == "mdc") {
        json j;
        j["nu_star"] = gaussian_mdc(theta1, theta2, parse_case_tag(case_tag));
        j["case"] = case_tag;
        emit_json(oo, j);
        return 0;
    }
    double xi = std::pow(static_cast<double>(n), -1.0 / 3.0);
    double delta = 1.0 / n;
    GaussianBound ach = gaussian_achievability_bound(inst, n, logM1, logM1M2, xi, delta);
    double gamma = 0.5 * std::log(static_cast<double>(n));
    OneShotResult os =
        gaussian_one_shot_converse(inst, CodeParams{n, logM1, logM1M2, gamma, gamma});
    json j;
    j["achievability"] = ach.value;
    j["one_shot"] = os.value;
    j["diagnostics"] = {{"achievability_raw", ach.raw},
                        {"covering_term", ach.lead},
                        {"vacuous", ach.vacuous},
                        {"one_shot_raw", os.raw},
                        {"one_shot_prob", os.prob}};
    emit_json(oo, j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"successive-refinement asymptotics toolkit"};
    app.require_subcommand(1);

    std::string instance;
    int decoder = 1;
    double r1_flag = 0;
    std::string case_tag = "iii";
    double epsilon = 0.05;
    double theta1 = 1.0, theta2 = 1.0;
    int n = 1000;
    double logM1 = 0, logM1M2 = 0;
    std::string mode = "exact";
    std::uint64_t trials = 100000, seed = 1;
    int fig_points = 50;
    double fig_dmax = 0.74;
    std::string out_prefix = "figure2";
    std::string gtask = "rd";

    OutputOptions oo_rd, oo_sr, oo_disp, oo_region, oo_mdc, oo_bounds, oo_g, oo_f1, oo_f2;

    auto* rd_cmd = app.add_subcommand("rd", "single-decoder rate-distortion solve");
    rd_cmd->add_option("--instance", instance)->required();
    rd_cmd->add_option("--decoder", decoder)->check(CLI::IsMember({1, 2}));
    add_output_flags(rd_cmd, oo_rd, "json", "nats");

    auto* sr_cmd = app.add_subcommand("sr", "minimal sum rate at a rate limit R1");
    sr_cmd->add_option("--instance", instance)->required();
    sr_cmd->add_option("--R1", r1_flag)->required();
    add_output_flags(sr_cmd, oo_sr, "json", "nats");

    auto* disp_cmd = app.add_subcommand("dispersion", "rate-dispersion report");
    disp_cmd->add_option("--instance", instance)->required();
    auto* disp_r1 = disp_cmd->add_option("--R1", r1_flag);
    add_output_flags(disp_cmd, oo_disp, "json", "nats");

    auto* region_cmd = app.add_subcommand("region", "second-order coding region boundary");
    region_cmd->add_option("--instance", instance)->required();
    region_cmd->add_option("--case", case_tag)->check(CLI::IsMember({"i", "ii", "iii"}));
    region_cmd->add_option("--epsilon", epsilon);
    auto* region_r1 = region_cmd->add_option("--R1", r1_flag);
    add_output_flags(region_cmd, oo_region, "csv", "nats");

    auto* mdc_cmd = app.add_subcommand("mdc", "moderate deviations constant");
    mdc_cmd->add_option("--instance", instance)->required();
    mdc_cmd->add_option("--case", case_tag)->check(CLI::IsMember({"i", "ii", "iii"}));
    mdc_cmd->add_option("--theta1", theta1);
    mdc_cmd->add_option("--theta2", theta2);
    auto* mdc_r1 = mdc_cmd->add_option("--R1", r1_flag);
    add_output_flags(mdc_cmd, oo_mdc, "json", "nats");

    auto* bounds_cmd = app.add_subcommand("bounds", "finite-blocklength bounds");
    bounds_cmd->add_option("--instance", instance)->required();
    bounds_cmd->add_option("--n", n)->required();
    bounds_cmd->add_option("--logM1", logM1)->required();
    bounds_cmd->add_option("--logM1M2", logM1M2)->required();
    bounds_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exact", "mc"}));
    bounds_cmd->add_option("--trials", trials);
    bounds_cmd->add_option("--seed", seed);
    add_output_flags(bounds_cmd, oo_bounds, "json", "nats");

    auto* g_cmd = app.add_subcommand("gaussian", "Gaussian source closed forms and bounds");
    g_cmd->add_option("--instance", instance)->required();
    g_cmd->add_option("--gtask", gtask)->check(CLI::IsMember({"rd", "region", "mdc", "bounds"}));
    g_cmd->add_option("--case", case_tag)->check(CLI::IsMember({"i", "ii", "iii"}));
    g_cmd->add_option("--epsilon", epsilon);
    g_cmd->add_option("--theta1", theta1);
    g_cmd->add_option("--theta2", theta2);
    g_cmd->add_option("--n", n);
    g_cmd->add_option("--logM1", logM1);
    g_cmd->add_option("--logM1M2", logM1M2);
    add_output_flags(g_cmd, oo_g, "json", "nats");

    auto* f1_cmd = app.add_subcommand("figure1", "rate-dispersion function sweep (CSV)");
    f1_cmd->add_option("--instance", instance)->required();
    f1_cmd->add_option("--points", fig_points);
    f1_cmd->add_option("--dmax", fig_dmax);
    add_output_flags(f1_cmd, oo_f1, "csv", "nats");

    auto* f2_cmd = app.add_subcommand("figure2", "second-order boundaries (three CSV files)");
    f2_cmd->add_option("--instance", instance)->required();
    f2_cmd->add_option("--out-prefix", out_prefix);
    double f2_eps = 0.005;
    f2_cmd->add_option("--epsilon", f2_eps);
    add_output_flags(f2_cmd, oo_f2, "csv", "bits");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rd_cmd->parsed()) return run_rd(instance, decoder, oo_rd);
        if (sr_cmd->parsed()) return run_sr(instance, r1_flag, oo_sr);
        if (disp_cmd->parsed()) {
            std::optional<double> r1 =
                disp_r1->count() ? std::optional<double>(r1_flag) : std::nullopt;
            return run_dispersion(instance, r1, oo_disp);
        }
        if (region_cmd->parsed()) {
            std::optional<double> r1 =
                region_r1->count() ? std::optional<double>(r1_flag) : std::nullopt;
            return run_region(instance, case_tag, epsilon, r1, oo_region);
        }
        if (mdc_cmd->parsed()) {
            std::optional<double> r1 =
                mdc_r1->count() ? std::optional<double>(r1_flag) : std::nullopt;
            return run_mdc(instance, case_tag, theta1, theta2, r1, oo_mdc);
        }
        if (bounds_cmd->parsed())
            return run_bounds(instance, n, logM1, logM1M2, mode, trials, seed, oo_bounds);
        if (g_cmd->parsed())
            return run_gaussian(instance, gtask, case_tag, epsilon, theta1, theta2, n, logM1,
                                logM1M2, oo_g);
        if (f1_cmd->parsed()) return run_figure1(instance, fig_points, fig_dmax, oo_f1);
        if (f2_cmd->parsed()) return run_figure2(instance, out_prefix, f2_eps, oo_f2);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
