#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "epiplan/config.hpp"
#include "epiplan/dataset.hpp"
#include "epiplan/experiments.hpp"
#include "epiplan/service.hpp"

using namespace epiplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<int> replications;
    std::string data_dir;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON config file");
    app->add_option("--seed", c.seed, "master seed (overrides config)");
    app->add_option("--out-dir", c.out_dir, "directory for CSV and report.json");
    app->add_option("--replications", c.replications, "replication count for the run");
}

void add_data(CLI::App* app, Common& c) {
    app->add_option("--data", c.data_dir, "dataset directory with regions.csv and series.csv (default: synthetic)");
}

Config load(const Common& c) {
    Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

RandomStream root(const Config& cfg) { return derive_rng(SeedSpec{cfg.seed, 0}, {}); }

Dataset dataset(const Common& c, const Config& cfg) {
    if (!c.data_dir.empty()) {
        LoadOptions opt;
        opt.decision_interval = cfg.decision_interval;
        opt.levels = cfg.levels;
        return load_dataset(c.data_dir, opt);
    }
    return synth_generate(synth_spec_from_config(cfg), root(cfg).derive({0})).dataset;
}

fs::path out_dir(const Common& c) {
    fs::create_directories(c.out_dir);
    return c.out_dir;
}

void write(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_report(const fs::path& dir, const json& report) { write(dir / "report.json", report.dump(2) + "\n"); }

std::string band_csv(const ValidationReport& r) {
    std::ostringstream s;
    s.precision(12);
    s << "region_id,day,lower,mean,upper,observed\n";
    for (const auto& reg : r.regions)
        for (std::size_t k = 0; k < reg.band.mean.size(); ++k)
            s << reg.region_id << ',' << reg.first_day + static_cast<Day>(k) << ',' << reg.band.lower[k] << ','
              << reg.band.mean[k] << ',' << reg.band.upper[k] << ',' << reg.observed[k] << '\n';
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective epidemic intervention planner"};
    app.require_subcommand(1);
    Common common;

    auto* estimate = app.add_subcommand("estimate", "fit the posterior on a dataset");
    add_common(estimate, common);
    add_data(estimate, common);
    Day as_of = 0;
    estimate->add_option("--as-of", as_of, "use observations up to this day (default: all)");

    auto* validate = app.add_subcommand("validate", "temporal validation of prediction bands");
    add_common(validate, common);
    add_data(validate, common);
    Day train_until = 12, predict_until = 120;
    validate->add_option("--train-until", train_until);
    validate->add_option("--predict-until", predict_until);
    bool self_generated = false;
    validate->add_flag("--self-generated", self_generated,
                       "replace observations after --train-until by draws from the fitted model");

    auto* compare = app.add_subcommand("compare", "policy comparison against baselines");
    add_common(compare, common);
    std::optional<double> r0;
    compare->add_option("--r0", r0, "recalibrate the truth to this basic reproduction number");

    auto* cv = app.add_subcommand("cv", "leave-one-out cross-validation");
    add_common(cv, common);
    add_data(cv, common);
    Day cv_train = 61, cv_from = 12, cv_day = 120;
    cv->add_option("--train-until", cv_train);
    cv->add_option("--predict-from", cv_from);
    cv->add_option("--predict-day", cv_day);

    auto* sens = app.add_subcommand("sensitivity", "robustness suite (SEIR truth, delays, prior effects)");
    add_common(sens, common);
    std::vector<std::string> only;
    sens->add_option("--only", only, "run only the named variations");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, common);

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    std::string state_dir = "state", host = "0.0.0.0";
    int port = 8080;
    if (const char* env = std::getenv("PORT")) port = std::atoi(env);
    serve->add_option("--state-dir", state_dir);
    serve->add_option("--host", host);
    serve->add_option("--port", port);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            HttpServer server(state_dir);
            std::cerr << "listening on " << host << ':' << port << '\n';
            server.listen(host, port);
            return 0;
        }
        Config cfg = load(common);
        if (common.replications) {
            cfg.evaluation_replications = *common.replications;
            cfg.band_replications = *common.replications;
        }
        const fs::path dir = out_dir(common);

        if (*estimate) {
            const Dataset data = dataset(common, cfg);
            Day day = as_of;
            if (day == 0)
                for (const auto& r : data.regions) day = std::max(day, r.series.last_day());
            const auto post = update_posterior(cfg.priors, transition_records(data, DelaySpec{cfg.delay_days}, day));
            const auto m = posterior_moments(post);
            std::ostringstream csv;
            csv.precision(12);
            csv << "parameter,mean,sd\n";
            csv << "gamma," << m.gamma.mean << ',' << std::sqrt(m.gamma.variance) << '\n';
            for (std::size_t j = 0; j < m.betas.size(); ++j)
                csv << "beta" << j + 1 << ',' << m.betas[j].mean << ',' << std::sqrt(m.betas[j].variance) << '\n';
            write(dir / "posterior.csv", csv.str());
            const auto mean = posterior_mean(post);
            write_report(dir, {{"as_of", day},
                               {"posterior", posterior_to_json(post)},
                               {"mean", {{"gamma", mean.gamma}, {"betas", mean.betas}}},
                               {"config", config_to_json(cfg)}});
        } else if (*validate) {
            Dataset data = dataset(common, cfg);
            if (self_generated)
                data = fitted_model_continuation(data, train_until, predict_until, cfg.priors, DelaySpec{cfg.delay_days},
                                                 root(cfg).derive({4}));
            const int reps = common.replications.value_or(cfg.band_replications);
            const auto rep = temporal_validation(data, train_until, predict_until, reps, cfg.priors,
                                                 DelaySpec{cfg.delay_days}, cfg.band_coverage, root(cfg).derive({1}));
            write(dir / "validation.csv", band_csv(rep));
            write_report(dir, rep.to_json());
            std::cout << "empirical coverage " << rep.empirical_coverage() << '\n';
        } else if (*compare) {
            if (r0) cfg.synth.truth = recalibrate_r0(cfg.synth.truth, *r0);
            const auto synth_data = synth_generate(synth_spec_from_config(cfg), root(cfg).derive({0}));
            const auto env = comparison_environment(
                synth_data, cfg,
                cfg.synth.environment == "gseir" ? std::optional<double>(cfg.synth.incubation_rate) : std::nullopt);
            const auto rep = policy_comparison(env, cfg, weight_grid(cfg.weight_exponents), cfg.baselines,
                                               root(cfg).derive({1}));
            write(dir / "comparison.csv", rep.to_csv());
            write_report(dir, rep.to_json());
        } else if (*cv) {
            const Dataset data = dataset(common, cfg);
            const int reps = common.replications.value_or(cfg.band_replications);
            const auto rep = leave_one_out_cv(data, cv_train, cv_from, cv_day, reps, cfg.priors,
                                              DelaySpec{cfg.delay_days}, root(cfg).derive({2}));
            std::ostringstream csv;
            csv.precision(12);
            csv << "region_id,predicted,observed,error_ratio,skipped\n";
            for (const auto& r : rep.regions)
                csv << r.region_id << ',' << r.predicted << ',' << r.observed << ',' << r.error_ratio << ','
                    << (r.skipped ? 1 : 0) << '\n';
            write(dir / "cv.csv", csv.str());
            write_report(dir, rep.to_json());
            std::cout << "mean error ratio " << rep.mean_error_ratio << '\n';
        } else if (*sens) {
            auto cases = sensitivity_cases(cfg, common.replications.value_or(25));
            if (!only.empty())
                std::erase_if(cases, [&](const SensitivityCase& c) {
                    return std::find(only.begin(), only.end(), c.name) == only.end();
                });
            const auto rep = sensitivity_suite(cfg, cases, root(cfg).derive({3}));
            write(dir / "sensitivity.csv", rep.to_csv());
            write_report(dir, rep.to_json());
        } else if (*synth) {
            const auto result = synth_generate(synth_spec_from_config(cfg), root(cfg).derive({0}));
            write_dataset(result.dataset, dir);
            std::ofstream latent(dir / "latent.csv");
            latent << "region_id,day,susceptible,infectious,removed\n";
            for (std::size_t l = 0; l < result.latent.size(); ++l) {
                const auto& tr = result.latent[l];
                for (std::size_t k = 0; k < tr.states.size(); ++k) {
                    const auto& s = tr.states[k];
                    latent << result.dataset.regions[l].meta.region_id << ',' << tr.start_day + static_cast<Day>(k)
                           << ',' << s.susceptible() << ',' << s.infectious() << ',' << s.removed() << '\n';
                }
            }
            write_report(dir, {{"regions", result.dataset.regions.size()},
                               {"horizon", result.dataset.horizon},
                               {"config", config_to_json(cfg)}});
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
