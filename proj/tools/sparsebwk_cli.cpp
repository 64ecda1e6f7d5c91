#include "sparsebwk/environment.hpp"
#include "sparsebwk/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace sparsebwk;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> threads;
    bool trajectories = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON experiment config");
    cmd->add_option("--preset", o.preset, "Named preset instead of a config file")
        ->check(CLI::IsMember(preset_names()));
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--reps", o.reps, "Replications");
    cmd->add_option("--threads", o.threads, "Worker threads");
    cmd->add_flag("--trajectories", o.trajectories, "Also write per-replication trajectory CSVs");
}

ExperimentSpec resolve(const CommonOptions& o, const std::string& fallback_preset) {
    if (!o.config.empty() && !o.preset.empty()) throw std::invalid_argument("use either --config or --preset");
    ExperimentSpec spec = !o.config.empty() ? load_spec(o.config) : preset(o.preset.empty() ? fallback_preset : o.preset);
    if (!o.out.empty()) spec.output_dir = o.out;
    if (o.seed) spec.master_seed = *o.seed;
    if (o.reps) spec.replications = *o.reps;
    if (o.threads) spec.threads = *o.threads;
    if (o.trajectories) spec.write_trajectories = true;
    spec.validate();
    return spec;
}

void print_summary(const AggregateResult& agg) {
    std::cout << "series,t,mean,se\n";
    for (const auto& s : agg.series)
        for (std::size_t k = 0; k < agg.t_grid.size(); ++k)
            std::cout << s.name << ',' << agg.t_grid[k] << ',' << s.mean[k] << ',' << s.se[k] << '\n';
    for (const auto& w : agg.warnings) std::cerr << "warning: " << w << '\n';
}

int run_kind(const CommonOptions& o, ExperimentKind kind, const std::string& fallback) {
    ExperimentSpec spec = resolve(o, fallback);
    if (spec.kind != kind)
        throw std::invalid_argument("config kind is " + to_string(spec.kind) + ", expected " + to_string(kind));
    print_summary(run_experiment(spec));
    return 0;
}

int run_sweep(const CommonOptions& o, const std::string& param, const std::vector<std::string>& values) {
    const ExperimentSpec base = resolve(o, "fig3-desk");
    if (base.output_dir.empty()) throw std::invalid_argument("sweep needs --out or output_dir");
    const nlohmann::json base_json = nlohmann::json::parse(spec_to_json_text(base));
    const nlohmann::json::json_pointer ptr(param);
    if (!base_json.contains(ptr)) throw std::invalid_argument("sweep: no config field at " + param);

    fs::create_directories(base.output_dir);
    std::ofstream summary(base.output_dir / "sweep.csv");
    summary << "value,series,t,mean,se\n" << std::setprecision(17);
    for (const auto& value : values) {
        nlohmann::json j = base_json;
        j[ptr] = nlohmann::json::parse(value);
        std::string tag = param.substr(param.find_last_of('/') + 1) + "=" + value;
        j["output_dir"] = (base.output_dir / tag).string();
        const AggregateResult agg = run_experiment(spec_from_json_text(j.dump()));
        for (const auto& s : agg.series)
            for (std::size_t k = 0; k < agg.t_grid.size(); ++k)
                summary << value << ',' << s.name << ',' << agg.t_grid[k] << ',' << s.mean[k] << ',' << s.se[k] << '\n';
        std::cerr << "done " << tag << '\n';
    }
    return 0;
}

int dump_instance(const CommonOptions& o) {
    const ExperimentSpec spec = resolve(o, "fig3-desk");
    InstanceConfig cfg = spec.instance;
    cfg.seed = spec.master_seed;
    const Instance inst = generate_instance(cfg);
    if (o.out.empty()) {
        save_instance(std::cout, inst);
    } else {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out);
        save_instance(f, inst);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse online estimation, high-dimensional bandits and bandits with knapsacks"};
    app.require_subcommand(1);

    CommonOptions est_o, bandit_o, bwk_o, sweep_o, inst_o;
    auto* est = app.add_subcommand("estimate", "Online HT estimation curves (default preset fig1-desk)");
    add_common(est, est_o);
    auto* bandit = app.add_subcommand("bandit", "Unconstrained bandit regret (default preset fig2-desk)");
    add_common(bandit, bandit_o);
    auto* bwk = app.add_subcommand("bwk", "Bandits with knapsacks regret (default preset fig3-desk)");
    add_common(bwk, bwk_o);
    auto* sweep = app.add_subcommand("sweep", "Repeat an experiment over values of one config field");
    add_common(sweep, sweep_o);
    std::string param;
    std::vector<std::string> values;
    sweep->add_option("--param", param, "JSON pointer into the config, e.g. /bwk/eps_scale")->required();
    sweep->add_option("--values", values, "JSON values to substitute")->required()->delimiter(',');
    auto* inst = app.add_subcommand("instance", "Write a generated instance as JSON");
    add_common(inst, inst_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (est->parsed()) return run_kind(est_o, ExperimentKind::estimation, "fig1-desk");
        if (bandit->parsed()) return run_kind(bandit_o, ExperimentKind::bandit, "fig2-desk");
        if (bwk->parsed()) return run_kind(bwk_o, ExperimentKind::bwk, "fig3-desk");
        if (sweep->parsed()) return run_sweep(sweep_o, param, values);
        if (inst->parsed()) return dump_instance(inst_o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
