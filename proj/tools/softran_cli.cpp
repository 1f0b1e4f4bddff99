// softran: runs seeded sweeps and writes CSV.
//
//   softran --experiment p_max_bs --config configs/desk.json --trials 10 --out power.csv
//   softran --experiment r_min --sweep "r_min=0,1,2,3" --solver scrm
//   softran --experiment region --out region.csv
//
// Exit codes: 0 ok, 2 bad arguments or config, 3 aborted run.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "softran/experiment.hpp"
#include "softran/rrm.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

int write_output(const std::string& path, const std::function<void(std::ostream&)>& emit) {
    if (path.empty() || path == "-") {
        emit(std::cout);
        return 0;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << '\n';
        return 2;
    }
    emit(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"software-defined RAN resource management sweeps"};
    std::string config_path, experiment = "p_max_bs", sweep, solver, out;
    int trials = 1, max_iter = 50, threads = 0, scrm_cap = 230, crm_cap = 387, users_max = 450;
    std::uint64_t seed = 1;
    double eps = 1e-3;
    bool no_timing = false, quiet = false;

    std::string names;
    for (const auto& p : softran::experiment_presets()) names += p.name + ", ";
    names += "region";

    app.add_option("--config", config_path, "scenario JSON; defaults built in")->check(CLI::ExistingFile);
    app.add_option("--experiment", experiment, "one of: " + names);
    app.add_option("--sweep", sweep, "axes as key=v1,v2;key2=...");
    app.add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "base seed; trial t uses seed + t");
    app.add_option("--solver", solver, "comma list of crm, scrm, heuristic-nos, no-comp");
    app.add_option("--out", out, "CSV path, - for stdout");
    app.add_option("--eps", eps, "stopping tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iter", max_iter, "outer iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "concurrent trials, 0 for all cores");
    app.add_flag("--no-timing", no_timing, "leave wall_time empty for reproducible bytes");
    app.add_flag("--quiet", quiet, "no summary on stderr");
    app.add_option("--scrm-cap", scrm_cap, "region: users SCRM alone supports");
    app.add_option("--crm-cap", crm_cap, "region: users CRM supports");
    app.add_option("--users-max", users_max, "region: largest user count");
    CLI11_PARSE(app, argc, argv);

    try {
        softran::ScenarioConfig base;
        if (!config_path.empty()) base = softran::load_config(config_path);

        if (experiment == "region") {
            const auto th = softran::calibrate_thresholds(base, scrm_cap, crm_cap);
            const auto rep = softran::region_analysis(base, 1, users_max, th);
            if (!quiet)
                std::cerr << "scrm max " << rep.scrm_max << ", crm max " << rep.crm_max << ", hybrid max "
                          << rep.hybrid_max << ", gain " << 100.0 * rep.gain() << "%\n";
            return write_output(out, [&](std::ostream& os) {
                softran::write_region_csv(os, base, rep, {1, 145});
            });
        }

        const auto& preset = softran::experiment_preset(experiment);
        softran::ExperimentSpec spec;
        spec.name = experiment;
        spec.base = base;
        spec.axes = sweep.empty() ? preset.axes : softran::parse_sweep(sweep);
        spec.solvers = solver.empty() ? preset.solvers : split(solver, ',');
        spec.trials = trials;
        spec.seed = seed;
        spec.eps = eps;
        spec.max_iter = max_iter;
        spec.threads = threads;
        spec.timing = !no_timing;
        softran::validate(spec);

        const auto res = softran::run_experiment(spec);
        if (!quiet) {
            for (const auto& s : softran::summarize(res)) {
                for (std::size_t a = 0; a < s.point.size(); ++a) std::cerr << res.axis_keys[a] << '=' << s.point[a] << ' ';
                std::cerr << s.solver << " mean_rate " << s.mean_rate << " outage " << s.outage;
                if (s.failures) std::cerr << " failed " << s.failures;
                std::cerr << '\n';
            }
        }
        return write_output(out, [&](std::ostream& os) { softran::write_csv(os, res); });
    } catch (const softran::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "aborted: " << e.what() << '\n';
        return 3;
    }
}
