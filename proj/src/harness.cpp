#include "sparsebwk/harness.hpp"

#include "sparsebwk/baselines.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sparsebwk {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::estimation: return "estimation";
    case ExperimentKind::bandit: return "bandit";
    case ExperimentKind::bwk: return "bwk";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "estimation") return ExperimentKind::estimation;
    if (name == "bandit") return ExperimentKind::bandit;
    if (name == "bwk") return ExperimentKind::bwk;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

void ExperimentSpec::validate() const {
    instance.validate();
    if (replications == 0) throw std::invalid_argument("spec: replications must be >= 1");
    if (threads == 0) throw std::invalid_argument("spec: threads must be >= 1");
    if (t_grid.empty()) throw std::invalid_argument("spec: t_grid must not be empty");
    if (t_grid.front() == 0) throw std::invalid_argument("spec: t_grid entries must be >= 1");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1]) throw std::invalid_argument("spec: t_grid must be strictly increasing");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("spec: rho must lie in (0, 1]");
    if (kind == ExperimentKind::estimation) {
        if (estimation.propensity != "full" && estimation.propensity != "decay")
            throw std::invalid_argument("spec: estimation.propensity must be full or decay");
        if (!(estimation.propensity_c > 0.0)) throw std::invalid_argument("spec: propensity_c must be > 0");
    }
    for (double f : bandit.etc_fractions)
        if (!(f > 0.0)) throw std::invalid_argument("spec: etc fractions must be > 0");
}

// ---------------------------------------------------------------- config io

namespace {

const std::set<std::string> kTopLevelKeys = {"schema_version", "kind",      "instance",   "online_ht",
                                             "estimation",     "bandit",    "bwk",        "replications",
                                             "t_grid",         "output_dir", "master_seed", "threads",
                                             "write_trajectories"};

template <class T>
void read_opt(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

} // namespace

ExperimentSpec spec_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("spec: top level must be an object");
    for (const auto& item : j.items())
        if (!kTopLevelKeys.count(item.key())) throw std::invalid_argument("spec: unknown key '" + item.key() + "'");
    if (j.value("schema_version", 0) != kSpecSchemaVersion)
        throw std::invalid_argument("spec: schema_version must be " + std::to_string(kSpecSchemaVersion));

    ExperimentSpec s;
    s.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("instance")) {
        const auto& i = j.at("instance");
        auto& c = s.instance;
        read_opt(i, "d", c.d);
        read_opt(i, "K", c.K);
        read_opt(i, "m", c.m);
        read_opt(i, "T", c.T);
        read_opt(i, "s0", c.s0);
        read_opt(i, "sigma", c.sigma);
        read_opt(i, "alpha", c.alpha);
        read_opt(i, "feature_bound", c.feature_bound);
        if (i.contains("budget_ratio")) {
            const auto& b = i.at("budget_ratio");
            c.budget_ratio = b.is_array() ? b.get<std::vector<double>>() : std::vector<double>{b.get<double>()};
        }
        read_opt(i, "signal_low", c.signal_low);
        read_opt(i, "signal_high", c.signal_high);
    }
    if (j.contains("online_ht")) {
        const auto& h = j.at("online_ht");
        read_opt(h, "rho", s.rho);
        if (h.contains("step_rule")) s.step_rule = step_rule_from_string(h.at("step_rule").get<std::string>());
    }
    if (j.contains("estimation")) {
        const auto& e = j.at("estimation");
        read_opt(e, "propensity", s.estimation.propensity);
        read_opt(e, "propensity_c", s.estimation.propensity_c);
        read_opt(e, "lasso_c", s.estimation.lasso_c);
    }
    if (j.contains("bandit")) {
        const auto& b = j.at("bandit");
        read_opt(b, "eps_scale", s.bandit.eps_scale);
        read_opt(b, "greedy", s.bandit.greedy);
        read_opt(b, "etc_c", s.bandit.etc_c);
        read_opt(b, "etc_fractions", s.bandit.etc_fractions);
    }
    if (j.contains("bwk")) {
        const auto& b = j.at("bwk");
        if (b.contains("mode")) s.bwk.mode = bwk_mode_from_string(b.at("mode").get<std::string>());
        read_opt(b, "z", s.bwk.z);
        read_opt(b, "delta", s.bwk.delta);
        read_opt(b, "t0", s.bwk.t0);
        read_opt(b, "eps_scale", s.bwk.eps_scale);
        read_opt(b, "r_max", s.bwk.r_max);
        read_opt(b, "normalize_dual", s.bwk.normalize_dual);
    }
    read_opt(j, "replications", s.replications);
    read_opt(j, "t_grid", s.t_grid);
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
    read_opt(j, "master_seed", s.master_seed);
    read_opt(j, "threads", s.threads);
    read_opt(j, "write_trajectories", s.write_trajectories);
    s.validate();
    return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return spec_from_json_text(ss.str());
}

std::string spec_to_json_text(const ExperimentSpec& s) {
    const auto& c = s.instance;
    json j;
    j["schema_version"] = kSpecSchemaVersion;
    j["kind"] = to_string(s.kind);
    j["instance"] = {{"d", c.d},
                     {"K", c.K},
                     {"m", c.m},
                     {"T", c.T},
                     {"s0", c.s0},
                     {"sigma", c.sigma},
                     {"alpha", c.alpha},
                     {"feature_bound", c.feature_bound},
                     {"budget_ratio", c.budget_ratio},
                     {"signal_low", c.signal_low},
                     {"signal_high", c.signal_high}};
    j["online_ht"] = {{"rho", s.rho}, {"step_rule", to_string(s.step_rule)}};
    j["estimation"] = {{"propensity", s.estimation.propensity},
                       {"propensity_c", s.estimation.propensity_c},
                       {"lasso_c", s.estimation.lasso_c}};
    j["bandit"] = {{"eps_scale", s.bandit.eps_scale},
                   {"greedy", s.bandit.greedy},
                   {"etc_c", s.bandit.etc_c},
                   {"etc_fractions", s.bandit.etc_fractions}};
    j["bwk"] = {{"mode", to_string(s.bwk.mode)}, {"z", s.bwk.z},
                {"delta", s.bwk.delta},          {"t0", s.bwk.t0},
                {"eps_scale", s.bwk.eps_scale},  {"r_max", s.bwk.r_max},
                {"normalize_dual", s.bwk.normalize_dual}};
    j["replications"] = s.replications;
    j["t_grid"] = s.t_grid;
    j["output_dir"] = s.output_dir.string();
    j["master_seed"] = s.master_seed;
    j["threads"] = s.threads;
    j["write_trajectories"] = s.write_trajectories;
    return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
    return {"fig1-desk", "fig1-paper", "fig2-desk", "fig2-paper", "fig3-desk", "fig3-paper"};
}

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    auto& c = s.instance;
    c.s0 = 10;
    c.sigma = 0.5;
    c.alpha = 0.5;
    s.master_seed = 20240601;
    if (name == "fig1-desk" || name == "fig1-paper") {
        s.kind = ExperimentKind::estimation;
        c.K = 1;
        c.d = name == "fig1-desk" ? 200 : 1000;
        s.replications = 20;
        s.t_grid = name == "fig1-desk" ? std::vector<std::size_t>{200, 300, 500, 700, 1000, 1400, 2000}
                                       : std::vector<std::size_t>{250, 500, 1000, 2000, 3000, 4000, 5000};
        s.estimation.lasso_c = {5.0, 1.0, 0.1};
    } else if (name == "fig2-desk" || name == "fig2-paper") {
        s.kind = ExperimentKind::bandit;
        c.d = name == "fig2-desk" ? 100 : 1000;
        c.K = 5;
        s.replications = 10;
        s.t_grid = name == "fig2-desk" ? std::vector<std::size_t>{1000, 2000, 4000}
                                       : std::vector<std::size_t>{2000, 4000, 8000, 16000};
        s.bandit.etc_c = {5.0, 1.0, 0.1};
        s.bandit.etc_fractions = {0.3, 0.5};
    } else if (name == "fig3-desk" || name == "fig3-paper") {
        s.kind = ExperimentKind::bwk;
        c.d = name == "fig3-desk" ? 50 : 200;
        c.K = 5;
        c.m = 5;
        c.budget_ratio = {0.25};
        s.replications = 10;
        s.t_grid = {1000, 2000, 4000, 8000};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    c.T = s.t_grid.back();
    s.validate();
    return s;
}

// ---------------------------------------------------------------- results

const Series& AggregateResult::at(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return s;
    throw std::out_of_range("no series named " + name);
}

bool AggregateResult::has(const std::string& name) const {
    return std::any_of(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
}

double standard_error(const std::vector<double>& values) {
    const auto n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double relative_regret(double regret, double opt) {
    if (!(opt > 0.0)) throw std::invalid_argument("relative_regret: opt must be > 0");
    return regret / opt;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------- replications

namespace {

struct File {
    std::string name;
    std::string text;
};

struct RepOutput {
    std::vector<std::pair<std::string, std::vector<double>>> metrics;
    std::vector<File> files;

    std::vector<double>& metric(const std::string& name, std::size_t n) {
        for (auto& [k, v] : metrics)
            if (k == name) return v;
        metrics.emplace_back(name, std::vector<double>(n, 0.0));
        return metrics.back().second;
    }
};

std::string fmt_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string rep_tag(std::size_t rep) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "rep%03zu", rep);
    return buf;
}

struct Streams {
    Rng instance;
    Rng context;
    Rng policy;

    explicit Streams(std::uint64_t rep_seed)
        : instance(derive_seed(rep_seed, 1)), context(derive_seed(rep_seed, 2)), policy(derive_seed(rep_seed, 3)) {}
};

RepOutput run_estimation_rep(const ExperimentSpec& spec, std::size_t rep, std::uint64_t seed) {
    Streams rng(seed);
    InstanceConfig ic = spec.instance;
    ic.T = spec.t_grid.back();
    const Instance inst = generate_instance(ic, rng.instance);
    const auto d = static_cast<Eigen::Index>(ic.d);
    const Vector& truth = inst.arms.front();
    const std::size_t n_grid = spec.t_grid.size();

    OnlineHt state(make_ht_config(inst.covariance, ic.s0, spec.rho, spec.step_rule, true), 0);
    Matrix gram = Matrix::Zero(d, d);
    Vector xty = Vector::Zero(d);
    std::size_t pulls = 0;
    std::vector<Vector> warm(spec.estimation.lasso_c.size(), Vector::Zero(d));
    const bool decay = spec.estimation.propensity == "decay";

    RepOutput out;
    std::ostringstream traj;
    if (spec.write_trajectories) traj << "round,pulled,p,sq_error,recovery\n" << std::setprecision(17);
    std::size_t k = 0;
    for (std::size_t t = 1; t <= ic.T; ++t) {
        const Round round = sample_round(inst, rng.context);
        const double p =
            decay ? std::min(1.0, spec.estimation.propensity_c / std::cbrt(static_cast<double>(t))) : 1.0;
        const bool pulled = uniform01(rng.policy) < p;
        std::optional<double> r;
        if (pulled) {
            r = reward(inst, 0, round);
            gram.noalias() += round.x * round.x.transpose();
            xty.noalias() += *r * round.x;
            ++pulls;
        }
        state.update(round.x, pulled, p, r);
        const double err = (state.estimate() - truth).squaredNorm();
        const double rec = support_recovery_rate(state.estimate(), truth);
        if (spec.write_trajectories)
            traj << t << ',' << (pulled ? 1 : 0) << ',' << p << ',' << err << ',' << rec << '\n';
        if (k < n_grid && t == spec.t_grid[k]) {
            out.metric("ht_sq_error", n_grid)[k] = err;
            out.metric("ht_recovery", n_grid)[k] = rec;
            for (std::size_t c = 0; c < spec.estimation.lasso_c.size(); ++c) {
                const std::string tag = "lasso_c=" + fmt_number(spec.estimation.lasso_c[c]);
                Vector beta = Vector::Zero(d);
                if (pulls > 0) {
                    const double n = static_cast<double>(pulls);
                    const LassoFit fit = lasso_fit_gram(gram / n, xty / n,
                                                        lasso_lambda(spec.estimation.lasso_c[c], ic.d, pulls), warm[c]);
                    beta = fit.beta;
                    warm[c] = beta;
                }
                out.metric(tag + "_sq_error", n_grid)[k] = (beta - truth).squaredNorm();
                out.metric(tag + "_recovery", n_grid)[k] = support_recovery_rate(beta, truth);
            }
            ++k;
        }
    }
    if (spec.write_trajectories) out.files.push_back({"estimation_" + rep_tag(rep) + ".csv", traj.str()});
    return out;
}

RepOutput run_bandit_rep(const ExperimentSpec& spec, std::size_t rep, std::uint64_t seed) {
    Streams rng(seed);
    InstanceConfig ic = spec.instance;
    ic.T = spec.t_grid.back();
    const Instance inst = generate_instance(ic, rng.instance);
    const std::size_t n_grid = spec.t_grid.size();
    const std::uint64_t ctx_seed = derive_seed(seed, 2);
    const std::uint64_t pol_seed = derive_seed(seed, 3);
    RepOutput out;

    auto record = [&](const std::string& tag, const BanditRunResult& res) {
        auto& regret = out.metric(tag + "_regret", n_grid);
        auto& error = out.metric(tag + "_error", n_grid);
        for (std::size_t k = 0; k < n_grid; ++k) {
            regret[k] = res.cumulative_regret[spec.t_grid[k] - 1];
            error[k] = res.estimator_error[spec.t_grid[k] - 1];
        }
        if (spec.write_trajectories) {
            std::ostringstream ss;
            write_bandit_trajectory(ss, res);
            out.files.push_back({tag + "_" + rep_tag(rep) + ".csv", ss.str()});
        }
    };

    BanditConfig bc;
    bc.scale = spec.bandit.eps_scale;
    bc.rho = spec.rho;
    bc.step_rule = spec.step_rule;
    {
        Rng ctx(ctx_seed), pol(pol_seed);
        record("ht_eps", run_bandit(inst, bc, ctx, pol));
    }
    if (spec.bandit.greedy) {
        bc.mode = EpsMode::zero;
        Rng ctx(ctx_seed), pol(pol_seed);
        record("ht_greedy", run_bandit(inst, bc, ctx, pol));
    }
    for (double f : spec.bandit.etc_fractions) {
        for (double c : spec.bandit.etc_c) {
            const std::string tag = "etc_f=" + fmt_number(f) + "_c=" + fmt_number(c);
            auto& regret = out.metric(tag + "_regret", n_grid);
            for (std::size_t k = 0; k < n_grid; ++k) {
                Instance horizon = inst;
                horizon.config.T = spec.t_grid[k];
                const double T = static_cast<double>(spec.t_grid[k]);
                const auto t1 = std::min<std::size_t>(
                    spec.t_grid[k] - 1, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * std::cbrt(T * T)))));
                Rng ctx(ctx_seed), pol(pol_seed);
                regret[k] = run_etc_lasso(horizon, t1, c, ctx, pol).final_regret();
            }
        }
    }
    return out;
}

RepOutput run_bwk_rep(const ExperimentSpec& spec, std::size_t rep, std::uint64_t seed) {
    const std::size_t n_grid = spec.t_grid.size();
    RepOutput out;
    BwkConfig cfg = spec.bwk;
    cfg.rho = spec.rho;
    cfg.step_rule = spec.step_rule;
    for (std::size_t k = 0; k < n_grid; ++k) {
        Streams rng(seed);
        InstanceConfig ic = spec.instance;
        ic.T = spec.t_grid[k];
        const Instance inst = generate_instance(ic, rng.instance);
        const BwkRunResult res = run_bwk(inst, cfg, rng.context, rng.policy);
        out.metric("regret", n_grid)[k] = res.regret;
        out.metric("relative_regret", n_grid)[k] = relative_regret(res.regret, res.hindsight_value);
        out.metric("hindsight_value", n_grid)[k] = res.hindsight_value;
        out.metric("collected", n_grid)[k] = res.collected;
        out.metric("tau", n_grid)[k] = static_cast<double>(res.tau);
        out.metric("z", n_grid)[k] = res.z;
        out.metric("final_error", n_grid)[k] = res.rounds.back().est_error_max;
        if (spec.write_trajectories) {
            std::ostringstream ss;
            write_bwk_trajectory(ss, res);
            out.files.push_back({"bwk_T" + std::to_string(spec.t_grid[k]) + "_" + rep_tag(rep) + ".csv", ss.str()});
        }
    }
    return out;
}

RepOutput run_replication(const ExperimentSpec& spec, std::size_t rep) {
    const std::uint64_t seed = derive_seed(spec.master_seed, rep);
    switch (spec.kind) {
    case ExperimentKind::estimation: return run_estimation_rep(spec, rep, seed);
    case ExperimentKind::bandit: return run_bandit_rep(spec, rep, seed);
    case ExperimentKind::bwk: return run_bwk_rep(spec, rep, seed);
    }
    throw std::logic_error("unhandled experiment kind");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::vector<PlotLine> lines_matching(const AggregateResult& agg, const std::string& suffix) {
    std::vector<PlotLine> lines;
    for (const auto& s : agg.series) {
        if (s.name.size() < suffix.size() || s.name.compare(s.name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        PlotLine line;
        line.label = s.name.substr(0, s.name.size() - suffix.size());
        if (line.label.empty()) line.label = s.name;
        for (auto t : agg.t_grid) line.x.push_back(static_cast<double>(t));
        line.y = s.mean;
        line.err = s.se;
        lines.push_back(std::move(line));
    }
    return lines;
}

void write_plots(const ExperimentSpec& spec, const AggregateResult& agg) {
    auto plot = [&](const std::string& file, const std::string& title, const std::string& xl, const std::string& yl,
                    const std::vector<PlotLine>& lines, bool logx, bool logy) {
        std::ostringstream ss;
        write_svg_plot(ss, title, xl, yl, lines, logx, logy);
        write_text(spec.output_dir / file, ss.str());
    };
    switch (spec.kind) {
    case ExperimentKind::estimation:
        plot("error_vs_t.svg", "Estimation error", "t", "squared l2 error", lines_matching(agg, "_sq_error"), true, true);
        plot("recovery_vs_t.svg", "Support recovery", "t", "recovery rate", lines_matching(agg, "_recovery"), true,
             false);
        break;
    case ExperimentKind::bandit:
        plot("regret_vs_t.svg", "Cumulative pseudo-regret", "t", "regret", lines_matching(agg, "_regret"), false,
             false);
        plot("error_vs_t.svg", "Max estimation error", "t", "l2 error", lines_matching(agg, "_error"), false, false);
        break;
    case ExperimentKind::bwk: {
        auto regret = lines_matching(agg, "regret");
        regret.erase(std::remove_if(regret.begin(), regret.end(), [](const PlotLine& l) { return l.label != "regret"; }),
                     regret.end());
        plot("regret_vs_T.svg", "Hindsight-LP regret", "T", "regret", regret, true, true);
        auto rel = lines_matching(agg, "relative_regret");
        plot("relative_regret_vs_T.svg", "Relative regret", "T", "regret / OPT", rel, true, false);
        break;
    }
    }
}

} // namespace

AggregateResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t reps = spec.replications;
    std::vector<RepOutput> outputs(reps);
    std::vector<std::string> errors(reps);
    std::vector<char> ok(reps, 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
            try {
                outputs[r] = run_replication(spec, r);
                ok[r] = 1;
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::min(spec.threads, reps);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    AggregateResult agg;
    agg.t_grid = spec.t_grid;
    for (std::size_t r = 0; r < reps; ++r) {
        if (!ok[r]) {
            agg.warnings.push_back("replication " + std::to_string(r) + " failed: " + errors[r]);
            continue;
        }
        agg.replication_ids.push_back(r);
        for (const auto& [name, values] : outputs[r].metrics) {
            auto it = std::find_if(agg.series.begin(), agg.series.end(), [&](const Series& s) { return s.name == name; });
            if (it == agg.series.end()) {
                agg.series.push_back({name, {}, {}, {}});
                it = agg.series.end() - 1;
            }
            it->raw.push_back(values);
        }
    }
    if (agg.replication_ids.empty()) throw std::runtime_error("run_experiment: every replication failed");

    const std::size_t n_grid = spec.t_grid.size();
    for (auto& s : agg.series) {
        s.mean.assign(n_grid, 0.0);
        s.se.assign(n_grid, 0.0);
        for (std::size_t k = 0; k < n_grid; ++k) {
            std::vector<double> column;
            for (const auto& row : s.raw) column.push_back(row[k]);
            double sum = 0.0;
            for (double v : column) sum += v;
            s.mean[k] = sum / static_cast<double>(column.size());
            s.se[k] = standard_error(column);
        }
    }

    if (!spec.output_dir.empty()) {
        std::filesystem::create_directories(spec.output_dir);
        std::ostringstream a, w;
        write_aggregate_csv(a, agg);
        write_raw_csv(w, agg);
        write_text(spec.output_dir / "aggregate.csv", a.str());
        write_text(spec.output_dir / "raw.csv", w.str());
        write_text(spec.output_dir / "spec.json", spec_to_json_text(spec));
        if (!agg.warnings.empty()) {
            std::string text;
            for (const auto& m : agg.warnings) text += m + "\n";
            write_text(spec.output_dir / "warnings.txt", text);
        }
        write_plots(spec, agg);
        if (spec.write_trajectories) {
            const auto dir = spec.output_dir / "trajectories";
            std::filesystem::create_directories(dir);
            for (std::size_t r : agg.replication_ids)
                for (const auto& f : outputs[r].files) write_text(dir / f.name, f.text);
        }
    }
    return agg;
}

void write_aggregate_csv(std::ostream& out, const AggregateResult& result) {
    out << "series,t,mean,se,n\n" << std::setprecision(17);
    for (const auto& s : result.series)
        for (std::size_t k = 0; k < result.t_grid.size(); ++k)
            out << s.name << ',' << result.t_grid[k] << ',' << s.mean[k] << ',' << s.se[k] << ',' << s.raw.size()
                << '\n';
}

void write_raw_csv(std::ostream& out, const AggregateResult& result) {
    out << "series,t,replication,value\n" << std::setprecision(17);
    for (const auto& s : result.series)
        for (std::size_t i = 0; i < s.raw.size(); ++i)
            for (std::size_t k = 0; k < result.t_grid.size(); ++k)
                out << s.name << ',' << result.t_grid[k] << ',' << result.replication_ids[i] << ',' << s.raw[i][k]
                    << '\n';
}

// ---------------------------------------------------------------- svg

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const {
        const double a = log ? std::log10(v) : v;
        return (a - lo) / (hi - lo);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0)
                if (e >= lo - 1e-9 && e <= hi + 1e-9) out.push_back(std::pow(10.0, e));
            if (out.size() < 2) {
                out.clear();
                for (int i = 0; i <= 4; ++i) out.push_back(std::pow(10.0, lo + (hi - lo) * i / 4.0));
            }
        } else {
            for (int i = 0; i <= 5; ++i) out.push_back(lo + (hi - lo) * i / 5.0);
        }
        return out;
    }
};

Axis make_axis(const std::vector<double>& values, bool log) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        const double a = log ? std::log10(v) : v;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    ax.lo = log ? lo - pad : std::min(lo - pad, lo >= 0.0 ? std::max(0.0, lo - pad) : lo - pad);
    ax.hi = hi + pad;
    return ax;
}

} // namespace

void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotLine>& lines, bool log_x, bool log_y) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr double W = 720, H = 460, L = 80, R = 200, Tm = 40, B = 60;
    const double pw = W - L - R, ph = H - Tm - B;

    std::vector<double> xs, ys;
    for (const auto& l : lines) {
        xs.insert(xs.end(), l.x.begin(), l.x.end());
        for (std::size_t i = 0; i < l.y.size(); ++i) {
            const double e = i < l.err.size() ? l.err[i] : 0.0;
            ys.push_back(l.y[i]);
            ys.push_back(l.y[i] + e);
            if (!log_y || l.y[i] - e > 0.0) ys.push_back(l.y[i] - e);
        }
    }
    const Axis ax = make_axis(xs, log_x);
    const Axis ay = make_axis(ys, log_y);
    auto px = [&](double v) { return L + ax.map(v) * pw; };
    auto py = [&](double v) { return Tm + (1.0 - ay.map(v)) * ph; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0.0) && (!log_y || y > 0.0);
    };

    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
        << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        const double x = px(t);
        out << "<line x1=\"" << x << "\" y1=\"" << Tm + ph << "\" x2=\"" << x << "\" y2=\"" << Tm + ph + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << Tm + ph + 18 << "\" text-anchor=\"middle\">" << t << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        out << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << t << "</text>\n";
    }
    out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape_xml(x_label)
        << (log_x ? " (log)" : "") << "</text>\n";
    out << "<text transform=\"translate(20," << Tm + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(y_label) << (log_y ? " (log)" : "") << "</text>\n";

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        const char* color = palette[i % 10];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < l.x.size() && k < l.y.size(); ++k)
            if (usable(l.x[k], l.y[k])) out << px(l.x[k]) << ',' << py(l.y[k]) << ' ';
        out << "\"/>\n";
        for (std::size_t k = 0; k < l.x.size() && k < l.y.size(); ++k) {
            if (!usable(l.x[k], l.y[k])) continue;
            out << "<circle cx=\"" << px(l.x[k]) << "\" cy=\"" << py(l.y[k]) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
            const double e = k < l.err.size() ? l.err[k] : 0.0;
            if (e > 0.0 && usable(l.x[k], l.y[k] - e))
                out << "<line x1=\"" << px(l.x[k]) << "\" y1=\"" << py(l.y[k] - e) << "\" x2=\"" << px(l.x[k])
                    << "\" y2=\"" << py(l.y[k] + e) << "\" stroke=\"" << color << "\"/>\n";
        }
        const double ly = Tm + 10 + 18 * static_cast<double>(i);
        out << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 32 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << L + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(l.label) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace sparsebwk
