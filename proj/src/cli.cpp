#include "ips/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ips/capacity.hpp"
#include "ips/engine.hpp"
#include "ips/errors.hpp"
#include "ips/flp.hpp"
#include "ips/fluid.hpp"
#include "ips/instance.hpp"
#include "ips/params.hpp"
#include "ips/policy.hpp"
#include "ips/report_io.hpp"
#include "ips/svg.hpp"

namespace ips {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string instance_path;
    std::string out_dir;
    bool plot = false;
};

struct OverrideOpts {
    double zeta0 = -1.0, zeta0_scale = -1.0, g_delta = -1.0, v_delta = -1.0;
    int n_prep = -1, n_resid = -1;
    double qp_num = -1.0, qr_num = -1.0;

    Overrides to_overrides() const {
        Overrides o;
        if (zeta0 >= 0.0) o.zeta0 = zeta0;
        if (zeta0_scale >= 0.0) o.zeta0_scale = zeta0_scale;
        if (g_delta >= 0.0) o.g_delta = g_delta;
        if (v_delta >= 0.0) o.v_delta = v_delta;
        if (n_prep >= 0) o.n_prep = n_prep;
        if (n_resid >= 0) o.n_resid = n_resid;
        if (qp_num >= 0.0) o.qp_numerator = qp_num;
        if (qr_num >= 0.0) o.qr_numerator = qr_num;
        return o;
    }
};

void add_override_flags(CLI::App* cmd, OverrideOpts& o) {
    cmd->add_option("--zeta0", o.zeta0, "Override zeta0 with an absolute value");
    cmd->add_option("--zeta0-scale", o.zeta0_scale, "Scale the derived zeta0");
    cmd->add_option("--g-delta", o.g_delta, "Override g_delta");
    cmd->add_option("--v-delta", o.v_delta, "Override v_delta");
    cmd->add_option("--n-prep", o.n_prep, "Override the Preparation workload n^P");
    cmd->add_option("--n-resid", o.n_resid, "Override the Residual workload n^R");
    cmd->add_option("--qp-num", o.qp_num, "Override the q^P numerator");
    cmd->add_option("--qr-num", o.qr_num, "Override the q^R numerator");
}

std::string canonical_kv(const ordered_json& config) {
    std::string s;
    for (auto it = config.begin(); it != config.end(); ++it)
        s += it.key() + "=" + it.value().dump() + ";";
    return s;
}

ordered_json with_digest(ordered_json config) {
    config["digest"] = digest_hex(fnv1a64(canonical_kv(config)));
    return config;
}

void emit(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

fs::path out_path(const CommonOpts& common, const std::string& name) {
    fs::path dir = common.out_dir.empty() ? fs::path(".") : fs::path(common.out_dir);
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << contents;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError(std::string("cannot parse ") + what + ": '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
    return out;
}

int cmd_validate(const CommonOpts& common) {
    ordered_json j;
    j["command"] = "validate";
    j["instance_path"] = common.instance_path;
    try {
        Instance instance = load_instance_file(common.instance_path);
        DerivedConstants constants = derive_constants(instance);
        j["status"] = "ok";
        j["instance"] = instance_to_json(instance);
        j["constants"] = constants_to_json(constants, instance);
        ordered_json checks;
        checks["prior_simplex"] = true;
        checks["mixture_simplex"] = true;
        checks["rate_normalization"] = true;
        checks["outcome_support"] = true;
        checks["distinguishability"] = constants.d_under > 0.0;
        j["checks"] = checks;
        emit(j);
        return 0;
    } catch (const Error& e) {
        j["status"] = "error";
        j["error"] = e.name();
        j["detail"] = e.what();
        emit(j);
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 1;
    }
}

struct LoadedInstance {
    Instance instance;
    DerivedConstants constants;
};

LoadedInstance load(const CommonOpts& common) {
    Instance instance = load_instance_file(common.instance_path);
    DerivedConstants constants = derive_constants(instance);
    return {std::move(instance), std::move(constants)};
}

int cmd_flp(const CommonOpts& common, double delta) {
    auto [instance, constants] = load(common);
    FlpResult flp = solve_flp(instance, constants, delta);
    ordered_json config;
    config["command"] = "flp";
    config["instance_path"] = common.instance_path;
    config["delta"] = delta;
    ordered_json j;
    j["command"] = "flp";
    j["config"] = with_digest(config);
    j["result"] = flp_to_json(flp, instance);
    emit(j);
    return 0;
}

int cmd_simulate(const CommonOpts& common, const std::string& policy_name, double delta, int m,
                 double horizon, double warmup, std::uint64_t seed, int grid,
                 const OverrideOpts& override_opts) {
    auto [instance, constants] = load(common);
    PolicyKind kind = policy_kind_from_string(policy_name);
    Overrides overrides = override_opts.to_overrides();

    PolicyParams params;
    const PolicyParams* pp = nullptr;
    if (kind == PolicyKind::ThreeStage) {
        params = policy_params(instance, constants, delta, m, overrides);
        pp = &params;
    }

    EngineConfig cfg;
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.grid_points = grid;
    SimReport report = run(instance, constants, kind, delta, m, cfg, pp);

    ordered_json config;
    config["command"] = "simulate";
    config["instance_path"] = common.instance_path;
    config["policy"] = policy_name;
    config["delta"] = delta;
    config["m"] = m;
    config["horizon"] = horizon;
    config["warmup"] = warmup;
    config["seed"] = seed;
    config["grid"] = grid;
    config["overrides"] = overrides_to_json(overrides);
    config = with_digest(config);
    std::string digest = config["digest"].get<std::string>();

    std::ostringstream csv;
    write_timeseries_csv(csv, report, instance);
    fs::path csv_path = out_path(common, "simulate_" + digest + ".csv");
    write_file(csv_path, csv.str());

    ordered_json j;
    j["command"] = "simulate";
    j["config"] = config;
    if (pp) j["params"] = params_to_json(params);
    j["report"] = report_to_json(report, instance);
    if (warmup > 0.0 && horizon > 0.0)
        j["report"]["mean_q_post_warmup"] = report.mean_q(warmup / horizon, 1.0);
    j["artifacts"]["timeseries_csv"] = csv_path.string();

    if (common.plot) {
        SvgSeries q{"Q", report.grid_time, report.q_series};
        SvgSeries qp{"Q_P", report.grid_time, report.qp_series};
        SvgSeries qa{"Q_A", report.grid_time, report.qa_series};
        SvgSeries qr{"Q_R", report.grid_time, report.qr_series};
        fs::path qsvg = out_path(common, "simulate_" + digest + "_q.svg");
        write_svg_chart(qsvg.string(), "Queue lengths", "time", "jobs", {q, qp, qa, qr});
        std::vector<SvgSeries> ws;
        for (std::size_t k = 0; k < report.w_series.size(); ++k)
            ws.push_back({"W_" + std::to_string(k), report.grid_time, report.w_series[k]});
        fs::path wsvg = out_path(common, "simulate_" + digest + "_w.svg");
        write_svg_chart(wsvg.string(), "Workloads", "time", "uninitiated inspections", ws);
        j["artifacts"]["q_svg"] = qsvg.string();
        j["artifacts"]["w_svg"] = wsvg.string();
    }

    std::cerr << "simulate: " << report.arrivals << " arrivals, " << report.departures
              << " departures, wall " << report.wall_clock_sec << " s\n";
    emit(j);
    return 0;
}

int cmd_capacity(const CommonOpts& common, const std::string& policy_name, double delta, int m_lo,
                 int m_hi, const CapacitySettings& settings, const OverrideOpts& override_opts) {
    auto [instance, constants] = load(common);
    PolicyKind kind = policy_kind_from_string(policy_name);
    Overrides overrides = override_opts.to_overrides();
    CapacityResult result =
        min_stable_m(instance, constants, delta, kind, overrides, m_lo, m_hi, settings);

    ordered_json config;
    config["command"] = "capacity";
    config["instance_path"] = common.instance_path;
    config["policy"] = policy_name;
    config["delta"] = delta;
    config["m_lo"] = m_lo;
    config["m_hi"] = m_hi;
    config["replicas"] = settings.replicas;
    config["horizon"] = settings.horizon;
    config["warmup_frac"] = settings.warmup_frac;
    config["seed"] = settings.seed;
    config["overrides"] = overrides_to_json(overrides);

    ordered_json j;
    j["command"] = "capacity";
    j["config"] = with_digest(config);
    j["result"] = capacity_to_json(result);
    emit(j);
    return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& policy_name, const std::string& deltas_text,
              int m_lo, int m_hi, const CapacitySettings& settings, double c0,
              const OverrideOpts& override_opts) {
    auto [instance, constants] = load(common);
    PolicyKind kind = policy_kind_from_string(policy_name);
    Overrides overrides = override_opts.to_overrides();
    std::vector<double> deltas = parse_double_list(deltas_text, "deltas");

    SweepResult result = sweep(instance, constants, kind, overrides, deltas, m_lo, m_hi, settings, c0);

    ordered_json config;
    config["command"] = "sweep";
    config["instance_path"] = common.instance_path;
    config["policy"] = policy_name;
    config["deltas"] = deltas;
    config["m_lo"] = m_lo;
    config["m_hi"] = m_hi;
    config["replicas"] = settings.replicas;
    config["horizon"] = settings.horizon;
    config["warmup_frac"] = settings.warmup_frac;
    config["seed"] = settings.seed;
    config["c0"] = c0;
    config["overrides"] = overrides_to_json(overrides);
    config = with_digest(config);
    std::string digest = config["digest"].get<std::string>();

    std::ostringstream csv;
    write_sweep_csv(csv, result);
    fs::path csv_path = out_path(common, "sweep_" + digest + ".csv");
    write_file(csv_path, csv.str());

    ordered_json j;
    j["command"] = "sweep";
    j["config"] = config;
    ordered_json rows = ordered_json::array();
    for (const auto& r : result.rows) {
        ordered_json row;
        row["delta"] = r.delta;
        row["m_psi"] = r.m_psi;
        row["m_star_f"] = r.m_star_f;
        row["b_delta"] = r.b_delta_value;
        row["ratio"] = r.ratio;
        row["envelope"] = r.envelope;
        row["error"] = r.error;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["artifacts"]["sweep_csv"] = csv_path.string();

    if (common.plot) {
        SvgSeries ratio{"m_psi / (b_delta m*_F)", {}, {}};
        SvgSeries envelope{"envelope", {}, {}};
        for (const auto& r : result.rows) {
            if (!r.error.empty()) continue;
            double x = std::log(1.0 / r.delta);
            ratio.x.push_back(x);
            ratio.y.push_back(r.ratio);
            envelope.x.push_back(x);
            envelope.y.push_back(r.envelope);
        }
        fs::path svg = out_path(common, "sweep_" + digest + ".svg");
        write_svg_chart(svg.string(), "Capacity ratio", "ln(1/delta)", "ratio", {ratio, envelope});
        j["artifacts"]["sweep_svg"] = svg.string();
    }
    emit(j);
    return 0;
}

int cmd_fluid(const CommonOpts& common, double delta, int m, double mq_prep, double mq_adapt,
              const std::string& pi_p_text, int pi_p_samples, int samples, double horizon, double dt,
              std::uint64_t seed, const std::string& w0_text, bool report_only,
              const OverrideOpts& override_opts) {
    auto [instance, constants] = load(common);
    Overrides overrides = override_opts.to_overrides();
    PolicyParams params = policy_params(instance, constants, delta, m, overrides);

    FluidOptions options;
    options.horizon = horizon;
    options.dt = dt;
    options.mq_prep = mq_prep > 0.0 ? mq_prep : m * params.q_prep;
    options.mq_adapt = mq_adapt > 0.0 ? mq_adapt : m * params.q_adapt;
    if (pi_p_text == "mc") {
        PrepErrorReport pe = estimate_prep_error(instance, constants, delta, pi_p_samples, seed);
        options.pi_p = pe.pi_p;
    } else if (!pi_p_text.empty()) {
        options.pi_p = parse_double_list(pi_p_text, "pi-p");
    }

    ordered_json config;
    config["command"] = "fluid";
    config["instance_path"] = common.instance_path;
    config["delta"] = delta;
    config["m"] = m;
    config["mq_prep"] = options.mq_prep;
    config["mq_adapt"] = options.mq_adapt;
    config["pi_p"] = options.pi_p.empty() ? instance.prior : options.pi_p;
    config["samples"] = samples;
    config["horizon"] = horizon;
    config["dt"] = dt;
    config["seed"] = seed;
    config["w0"] = w0_text;
    config["overrides"] = overrides_to_json(overrides);
    config = with_digest(config);
    std::string digest = config["digest"].get<std::string>();

    ordered_json j;
    j["command"] = "fluid";
    j["config"] = config;
    j["params"] = params_to_json(params);

    if (!w0_text.empty()) {
        std::vector<double> w0 = parse_double_list(w0_text, "w0");
        FluidTrajectory traj = fluid_integrate(instance, constants, params, options, w0);
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        fs::path csv_path = out_path(common, "fluid_" + digest + ".csv");
        write_file(csv_path, csv.str());
        ordered_json t;
        t["final_lyapunov"] = traj.lyapunov.back();
        t["max_drift"] = traj.max_drift;
        t["nonincreasing"] = traj.nonincreasing;
        j["trajectory"] = t;
        j["artifacts"]["trajectory_csv"] = csv_path.string();
        if (common.plot) {
            fs::path svg = out_path(common, "fluid_" + digest + ".svg");
            write_svg_chart(svg.string(), "Fluid Lyapunov", "time", "L(w(t))",
                            {{"L", traj.time, traj.lyapunov}});
            j["artifacts"]["fluid_svg"] = svg.string();
        }
        emit(j);
        return 0;
    }

    ContractionReport report =
        check_contraction(instance, constants, params, options, samples, seed, report_only);
    if (!report.threshold_met)
        std::cerr << "warning: stability threshold not met (m q^A = " << report.mq_adapt
                  << " vs required " << report.threshold_stability << ")\n";

    // Re-integrate the worst sample for the trajectory artifact.
    double worst = -1.0;
    std::vector<double> worst_w0;
    for (const auto& s : report.per_sample) {
        if (s.min_lyapunov > worst) {
            worst = s.min_lyapunov;
            worst_w0 = s.w0;
        }
    }
    if (!worst_w0.empty()) {
        FluidTrajectory traj = fluid_integrate(instance, constants, params, options, worst_w0);
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        fs::path csv_path = out_path(common, "fluid_" + digest + ".csv");
        write_file(csv_path, csv.str());
        j["artifacts"]["worst_trajectory_csv"] = csv_path.string();
        if (common.plot) {
            fs::path svg = out_path(common, "fluid_" + digest + ".svg");
            write_svg_chart(svg.string(), "Fluid Lyapunov (worst sample)", "time", "L(w(t))",
                            {{"L", traj.time, traj.lyapunov}});
            j["artifacts"]["fluid_svg"] = svg.string();
        }
    }
    j["contraction"] = contraction_to_json(report);
    emit(j);
    return 0;
}

int cmd_prep_error(const CommonOpts& common, double delta, long long samples, std::uint64_t seed,
                   int n_prep_override) {
    auto [instance, constants] = load(common);
    std::optional<int> np;
    if (n_prep_override >= 0) np = n_prep_override;
    PrepErrorReport report = estimate_prep_error(instance, constants, delta, samples, seed, np);

    ordered_json config;
    config["command"] = "prep-error";
    config["instance_path"] = common.instance_path;
    config["delta"] = delta;
    config["samples"] = samples;
    config["seed"] = seed;
    config["n_prep_override"] = n_prep_override;

    ordered_json j;
    j["command"] = "prep-error";
    j["config"] = with_digest(config);
    j["result"] = prep_error_to_json(report, instance);
    emit(j);
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"ipsim: simulator and capacity toolkit for noisy-inspection classification systems"};
    app.require_subcommand(1);
    // flags given on the command line override values from --config; the
    // effective merged values are echoed into every output document
    app.set_config("--config", "", "Read default flag values from a TOML/INI file");

    CommonOpts common;
    const char* env_dir = std::getenv("IPSIM_OUT_DIR");
    common.out_dir = env_dir ? env_dir : ".";

    auto add_common = [&](CLI::App* cmd, bool with_plot = true) {
        cmd->add_option("instance", common.instance_path, "Instance JSON file")->required();
        cmd->add_option("--out-dir", common.out_dir, "Directory for CSV/SVG artifacts");
        if (with_plot) cmd->add_flag("--plot", common.plot, "Emit SVG plots");
    };

    // validate
    auto* c_validate = app.add_subcommand("validate", "Validate an instance and print its constants");
    add_common(c_validate, false);

    // flp
    double delta = 0.05;
    auto* c_flp = app.add_subcommand("flp", "Solve the capacity benchmark LP");
    add_common(c_flp, false);
    c_flp->add_option("--delta", delta, "Accuracy parameter")->required();

    // simulate
    std::string policy_name = "three-stage";
    int m = 10;
    double horizon = 1000.0, warmup = 0.0;
    std::uint64_t seed = 0;
    int grid = 1000;
    OverrideOpts override_opts;
    auto* c_sim = app.add_subcommand("simulate", "Run one simulation replica");
    add_common(c_sim);
    c_sim->add_option("--policy", policy_name, "three-stage | heuristic | oracle")->required();
    c_sim->add_option("--delta", delta, "Accuracy parameter")->required();
    c_sim->add_option("--m", m, "Number of experts")->required();
    c_sim->add_option("--horizon", horizon, "Simulated time")->required();
    c_sim->add_option("--warmup", warmup, "Report-level warmup truncation");
    c_sim->add_option("--seed", seed, "Root RNG seed")->required();
    c_sim->add_option("--grid", grid, "Time-series grid cells");
    add_override_flags(c_sim, override_opts);

    // capacity
    int m_lo = 1, m_hi = 64;
    CapacitySettings settings;
    auto* c_cap = app.add_subcommand("capacity", "Bisect for the minimum stable system size");
    add_common(c_cap, false);
    c_cap->add_option("--policy", policy_name)->required();
    c_cap->add_option("--delta", delta)->required();
    c_cap->add_option("--m-lo", m_lo, "Bracket lower end (expected unstable)")->required();
    c_cap->add_option("--m-hi", m_hi, "Bracket upper end (expected stable)")->required();
    c_cap->add_option("--replicas", settings.replicas, "Replicas per stability verdict");
    c_cap->add_option("--horizon", settings.horizon, "Horizon per replica");
    c_cap->add_option("--warmup-frac", settings.warmup_frac, "Warmup fraction (<= 0.1)");
    c_cap->add_option("--slope-tol", settings.slope_tol, "Stability slope tolerance");
    c_cap->add_option("--grid", settings.grid_points, "Grid cells per replica");
    c_cap->add_option("--seed", settings.seed, "Root RNG seed")->required();
    c_cap->add_flag("--verify-bracket", settings.verify_bracket,
                    "Re-check bracket endpoints and one interior point with shifted seeds");
    add_override_flags(c_cap, override_opts);

    // sweep
    std::string deltas_text;
    double c0 = 1.0;
    auto* c_sweep = app.add_subcommand("sweep", "Capacity bisection across a delta grid");
    add_common(c_sweep);
    c_sweep->add_option("--policy", policy_name)->required();
    c_sweep->add_option("--deltas", deltas_text, "Comma-separated delta grid")->required();
    c_sweep->add_option("--m-lo", m_lo)->required();
    c_sweep->add_option("--m-hi", m_hi)->required();
    c_sweep->add_option("--replicas", settings.replicas);
    c_sweep->add_option("--horizon", settings.horizon);
    c_sweep->add_option("--warmup-frac", settings.warmup_frac);
    c_sweep->add_option("--slope-tol", settings.slope_tol);
    c_sweep->add_option("--grid", settings.grid_points);
    c_sweep->add_option("--seed", settings.seed)->required();
    c_sweep->add_option("--c0", c0, "Constant of the theoretical envelope curve");
    add_override_flags(c_sweep, override_opts);

    // fluid
    double mq_prep = -1.0, mq_adapt = -1.0, fluid_T = 2.0, fluid_dt = 1e-4;
    int fluid_samples = 64, pi_p_samples = 20000;
    std::string pi_p_text, w0_text;
    bool report_only = false;
    auto* c_fluid = app.add_subcommand("fluid", "Fluid trajectories and the contraction check");
    add_common(c_fluid);
    c_fluid->add_option("--delta", delta)->required();
    c_fluid->add_option("--m", m, "System size used to derive default m q^P / m q^A")->required();
    c_fluid->add_option("--mq-prep", mq_prep, "Override the Preparation service rate m q^P");
    c_fluid->add_option("--mq-adapt", mq_adapt, "Override the Adaptive service rate m q^A");
    c_fluid->add_option("--pi-p", pi_p_text, "Coarse-estimate distribution: CSV list or 'mc'");
    c_fluid->add_option("--pi-p-samples", pi_p_samples, "Monte Carlo samples for --pi-p mc");
    c_fluid->add_option("--samples", fluid_samples, "Unit-sphere initial conditions");
    c_fluid->add_option("--T", fluid_T, "Integration horizon");
    c_fluid->add_option("--dt", fluid_dt, "Euler step");
    c_fluid->add_option("--seed", seed)->required();
    c_fluid->add_option("--w0", w0_text, "Integrate a single trajectory from this state");
    c_fluid->add_flag("--report-only", report_only, "Run even when the stability threshold fails");
    add_override_flags(c_fluid, override_opts);

    // prep-error
    long long pe_samples = 10000;
    int n_prep_override = -1;
    auto* c_pe = app.add_subcommand("prep-error", "Monte Carlo Preparation-stage error estimate");
    add_common(c_pe, false);
    c_pe->add_option("--delta", delta)->required();
    c_pe->add_option("--samples", pe_samples, "Number of isolated jobs");
    c_pe->add_option("--seed", seed)->required();
    c_pe->add_option("--n-prep", n_prep_override, "Override the Preparation workload");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_validate)) return cmd_validate(common);
        if (app.got_subcommand(c_flp)) return cmd_flp(common, delta);
        if (app.got_subcommand(c_sim))
            return cmd_simulate(common, policy_name, delta, m, horizon, warmup, seed, grid,
                                override_opts);
        if (app.got_subcommand(c_cap))
            return cmd_capacity(common, policy_name, delta, m_lo, m_hi, settings, override_opts);
        if (app.got_subcommand(c_sweep))
            return cmd_sweep(common, policy_name, deltas_text, m_lo, m_hi, settings, c0,
                             override_opts);
        if (app.got_subcommand(c_fluid))
            return cmd_fluid(common, delta, m, mq_prep, mq_adapt, pi_p_text, pi_p_samples,
                             fluid_samples, fluid_T, fluid_dt, seed, w0_text, report_only,
                             override_opts);
        if (app.got_subcommand(c_pe))
            return cmd_prep_error(common, delta, pe_samples, seed, n_prep_override);
        return 2;
    } catch (const Error& e) {
        ordered_json j;
        j["status"] = "error";
        j["error"] = e.name();
        j["detail"] = e.what();
        emit(j);
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        ordered_json j;
        j["status"] = "error";
        j["error"] = "InternalError";
        j["detail"] = e.what();
        emit(j);
        std::cerr << "InternalError: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ips
