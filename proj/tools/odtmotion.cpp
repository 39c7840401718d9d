// odtmotion: rigid-motion estimation for optical diffraction tomography
// Command-line front end.
//
//   odtmotion simulate  [--config c.json] [--grid-n N] [--time-steps M]
//                       [--seed S] [--noise SIGMA] [--out frames.dtmf]
//   odtmotion estimate  frames.dtmf [--method m] [--retraction r]
//                       [--out estimated.json]
//   odtmotion run       [--config c.json] [--method m] [--retraction r]
//                       [--grid-n N] [--time-steps M] [--seed S]
//                       [--noise SIGMA] [--out report.csv]
//   odtmotion report    report.csv
//
// Exit codes: 0 success; 2 estimator ambiguity in any step; 1 on I/O or
// configuration errors.

#include <odt/odt.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
    std::string config_path;
    std::string method;
    std::string retraction;
    std::string out;
    int grid_n = 0;
    int time_steps = 0;
    std::uint64_t seed = 0;
    double noise = 0.0;
    CLI::Option *opt_method = nullptr;
    CLI::Option *opt_retraction = nullptr;
    CLI::Option *opt_grid_n = nullptr;
    CLI::Option *opt_time_steps = nullptr;
    CLI::Option *opt_seed = nullptr;
    CLI::Option *opt_noise = nullptr;
};

void add_config_flags(CLI::App &cmd, CommonOptions &opts) {
    cmd.add_option("--config", opts.config_path,
                   "experiment configuration (JSON)");
    opts.opt_grid_n =
        cmd.add_option("--grid-n", opts.grid_n, "polar grid resolution N");
    opts.opt_time_steps = cmd.add_option("--time-steps", opts.time_steps,
                                         "samples over one revolution");
    opts.opt_seed = cmd.add_option("--seed", opts.seed, "noise seed");
    opts.opt_noise =
        cmd.add_option("--noise", opts.noise, "relative noise level sigma");
}

void add_method_flags(CLI::App &cmd, CommonOptions &opts) {
    opts.opt_method =
        cmd.add_option("--method", opts.method,
                       "estimator: direct|infinitesimal|combined|stereo");
    opts.opt_retraction = cmd.add_option(
        "--retraction", opts.retraction, "integrator retraction: polar|cayley");
}

/// Assemble the effective config: file values (if any) overridden by flags.
odt::ExperimentConfig effective_config(const CommonOptions &opts) {
    odt::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = odt::read_config(opts.config_path);
    }
    if (opts.opt_grid_n != nullptr && opts.opt_grid_n->count() > 0) {
        cfg.grid_n = opts.grid_n;
    }
    if (opts.opt_time_steps != nullptr && opts.opt_time_steps->count() > 0) {
        cfg.time_steps = opts.time_steps;
    }
    if (opts.opt_seed != nullptr && opts.opt_seed->count() > 0) {
        cfg.seed = opts.seed;
    }
    if (opts.opt_noise != nullptr && opts.opt_noise->count() > 0) {
        cfg.noise_sigma = opts.noise;
    }
    if (opts.opt_method != nullptr && opts.opt_method->count() > 0) {
        cfg.estimator = odt::estimator_from_string(opts.method);
    }
    if (opts.opt_retraction != nullptr && opts.opt_retraction->count() > 0) {
        cfg.retraction = odt::retraction_from_string(opts.retraction);
    }
    if (!opts.out.empty()) {
        cfg.out_path = opts.out;
    }
    odt::validate_config(cfg);
    return cfg;
}

void print_column(const char *name, const std::vector<double> &col) {
    const nlohmann::json s = odt::detail::column_summary(col);
    if (s.is_null()) {
        std::printf("  %-16s (no data)\n", name);
        return;
    }
    std::printf("  %-16s max %.3e   median %.3e   final %.3e\n", name,
                s.at("max").get<double>(), s.at("median").get<double>(),
                s.at("final").get<double>());
}

void print_report_summary(const odt::ErrorReport &report) {
    std::printf("steps: %zu\n", report.times.size());
    print_column("err_pol", report.err_pol);
    print_column("err_cay", report.err_cay);
    print_column("err_cc", report.err_cc);
    print_column("err_translation", report.err_translation);
    print_column("j_min", report.j_min);
    for (const std::string &w : report.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
}

int cmd_simulate(const CommonOptions &opts) {
    odt::ExperimentConfig cfg = effective_config(opts);
    const std::string out =
        cfg.out_path.empty() ? "frames.dtmf" : cfg.out_path;
    const odt::RigidTrajectory truth = odt::scenario_trajectory(cfg);
    const odt::PolarGrid grid = odt::PolarGrid::standard(cfg.k0, cfg.grid_n);
    const int steps = static_cast<int>(truth.size());
    const bool complex_frames =
        cfg.scenario == odt::Scenario::WithTranslation || cfg.noise_sigma > 0.0;
    if (complex_frames) {
        std::vector<odt::MuFrame> mus(steps);
        odt::detail::parallel_for(steps, [&](int j) {
            mus[j] = odt::simulate_mu(cfg.phantom, truth.rotations[j],
                                      truth.translations[j], grid,
                                      truth.times[j]);
            if (cfg.noise_sigma > 0.0) {
                odt::add_noise(mus[j], cfg.noise_sigma,
                               cfg.seed * 1000003ULL +
                                   static_cast<std::uint64_t>(j));
            }
        });
        odt::write_frames(mus, out);
        std::printf("wrote %d complex frames (N=%d) to %s\n", steps,
                    cfg.grid_n, out.c_str());
    } else {
        std::vector<odt::NuFrame> nus(steps);
        odt::detail::parallel_for(steps, [&](int j) {
            nus[j] = odt::simulate_nu(cfg.phantom, truth.rotations[j],
                                      truth.translations[j], grid,
                                      truth.times[j]);
        });
        odt::write_frames(nus, out);
        std::printf("wrote %d real frames (N=%d) to %s\n", steps, cfg.grid_n,
                    out.c_str());
    }
    return 0;
}

int cmd_estimate(const CommonOptions &opts, const std::string &input) {
    odt::EstimatorKind estimator = odt::EstimatorKind::Combined;
    if (opts.opt_method != nullptr && opts.opt_method->count() > 0) {
        estimator = odt::estimator_from_string(opts.method);
    }
    odt::Retraction retraction = odt::Retraction::Polar;
    if (opts.opt_retraction != nullptr && opts.opt_retraction->count() > 0) {
        retraction = odt::retraction_from_string(opts.retraction);
    }

    std::vector<odt::MuFrame> mus;
    std::vector<odt::NuFrame> nus;
    try {
        mus = odt::read_mu_frames(input);
        nus.reserve(mus.size());
        for (const odt::MuFrame &mu : mus) {
            nus.push_back(odt::nu_from_mu(mu));
        }
    } catch (const odt::IoError &) {
        nus = odt::read_nu_frames(input);
    }
    std::vector<double> times;
    times.reserve(nus.size());
    for (const odt::NuFrame &f : nus) {
        times.push_back(f.time);
    }

    const odt::MotionEstimate estimate =
        odt::estimate_motion(nus, times, estimator, retraction);

    odt::RigidTrajectory traj;
    traj.times = times;
    traj.rotations = estimate.rotations;
    traj.translations.assign(times.size(), odt::Vec3::Zero());
    std::vector<std::string> warnings = estimate.warnings;
    if (!mus.empty()) {
        try {
            traj.translations =
                odt::estimate_translations(mus, estimate.rotations);
        } catch (const odt::Error &err) {
            warnings.push_back(std::string("translation: ") + err.what());
        }
    }

    const std::string out =
        opts.out.empty() ? input + ".estimated.json" : opts.out;
    std::ofstream file(out);
    if (!file) {
        throw odt::IoError("cannot open for writing: " + out);
    }
    file << odt::trajectory_to_json(traj).dump(2) << '\n';
    std::printf("estimated %zu poses (%s) -> %s\n", traj.times.size(),
                odt::to_string(estimator).c_str(), out.c_str());
    for (const std::string &w : warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    return estimate.ambiguous_steps > 0 ? 2 : 0;
}

int cmd_run(const CommonOptions &opts) {
    odt::ExperimentConfig cfg = effective_config(opts);
    const std::string out = cfg.out_path.empty() ? "report.csv" : cfg.out_path;
    const odt::ErrorReport report = odt::run_scenario(cfg);
    odt::write_report(report, out);
    std::printf("scenario %s, estimator %s, retraction %s\n",
                odt::to_string(cfg.scenario).c_str(),
                odt::to_string(cfg.estimator).c_str(),
                odt::to_string(cfg.retraction).c_str());
    print_report_summary(report);
    std::printf("simulate %.1fs, estimate %.1fs; report -> %s\n",
                report.seconds_simulate, report.seconds_estimate, out.c_str());
    return report.ambiguous_steps > 0 ? 2 : 0;
}

int cmd_report(const std::string &input) {
    const odt::ErrorReport report = odt::read_report_csv(input);
    print_report_summary(report);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"rigid-motion estimation for optical diffraction tomography"};
    app.require_subcommand(1);
    int status = 0;

    CommonOptions sim_opts;
    CLI::App *simulate = app.add_subcommand(
        "simulate", "simulate a trajectory and write the frame set");
    add_config_flags(*simulate, sim_opts);
    simulate->add_option("--out", sim_opts.out, "output frame file");
    simulate->callback([&] { status = cmd_simulate(sim_opts); });

    CommonOptions est_opts;
    std::string est_input;
    CLI::App *estimate = app.add_subcommand(
        "estimate", "estimate rigid motion from a frame set");
    estimate->add_option("input", est_input, "frame file (simulate output)")
        ->required();
    add_method_flags(*estimate, est_opts);
    estimate->add_option("--out", est_opts.out, "output trajectory JSON");
    estimate->callback([&] { status = cmd_estimate(est_opts, est_input); });

    CommonOptions run_opts;
    CLI::App *run = app.add_subcommand(
        "run", "simulate, estimate, and write the error report");
    add_config_flags(*run, run_opts);
    add_method_flags(*run, run_opts);
    run->add_option("--out", run_opts.out, "output report CSV");
    run->callback([&] { status = cmd_run(run_opts); });

    std::string report_input;
    CLI::App *report =
        app.add_subcommand("report", "summarize an error report CSV");
    report->add_option("input", report_input, "report CSV (run output)")
        ->required();
    report->callback([&] { status = cmd_report(report_input); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    } catch (const odt::AmbiguityError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const odt::Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return status;
}
