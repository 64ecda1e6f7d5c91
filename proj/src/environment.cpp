#include "sparsebwk/environment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sparsebwk {

double InstanceConfig::ratio(std::size_t i) const {
    if (budget_ratio.size() == 1) return budget_ratio.front();
    return budget_ratio.at(i);
}

void InstanceConfig::validate() const {
    if (d == 0 || K == 0 || m == 0 || T == 0) throw std::invalid_argument("InstanceConfig: d, K, m, T must be >= 1");
    if (s0 == 0 || s0 > d) throw std::invalid_argument("InstanceConfig: need 1 <= s0 <= d");
    if (!(sigma >= 0.0)) throw std::invalid_argument("InstanceConfig: sigma must be >= 0");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("InstanceConfig: alpha must lie in [0, 1)");
    if (!(feature_bound > 0.0)) throw std::invalid_argument("InstanceConfig: feature_bound must be > 0");
    if (budget_ratio.size() != 1 && budget_ratio.size() != m)
        throw std::invalid_argument("InstanceConfig: budget_ratio needs 1 or m entries");
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ratio(i);
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("InstanceConfig: budget_ratio outside [0, 1]");
    }
    if (!(signal_low >= 0.0 && signal_low <= signal_high && signal_high <= 1.0))
        throw std::invalid_argument("InstanceConfig: need 0 <= signal_low <= signal_high <= 1");
}

void finalize_instance(Instance& inst) {
    const auto& cfg = inst.config;
    inst.covariance = power_decay_covariance(cfg.d, cfg.alpha);
    Eigen::LLT<Matrix> llt(inst.covariance);
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance is not positive definite");
    inst.covariance_factor = llt.matrixL();
    double max_row = 0.0;
    for (const auto& w : inst.weights)
        for (Eigen::Index i = 0; i < w.rows(); ++i) max_row = std::max(max_row, w.row(i).lpNorm<1>());
    inst.consumption_bound = max_row * cfg.feature_bound;
}

Instance generate_instance(const InstanceConfig& config, Rng& rng) {
    config.validate();
    Instance inst;
    inst.config = config;
    const auto d = static_cast<Eigen::Index>(config.d);
    const auto m = static_cast<Eigen::Index>(config.m);
    std::uniform_real_distribution<double> magnitude(config.signal_low, config.signal_high);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::size_t> pool(config.d);
    for (std::size_t a = 0; a < config.K; ++a) {
        // partial Fisher-Yates: first s0 slots are a uniform size-s0 subset
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t k = 0; k < config.s0; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, config.d - 1);
            std::swap(pool[k], pool[pick(rng)]);
        }
        std::vector<std::size_t> supp(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(config.s0));
        std::sort(supp.begin(), supp.end());

        Vector mu = Vector::Zero(d);
        for (auto j : supp) {
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
            mu[static_cast<Eigen::Index>(j)] = sign * magnitude(rng);
        }
        Matrix w = Matrix::Zero(m, d);
        for (Eigen::Index i = 0; i < m; ++i)
            for (auto j : supp) w(i, static_cast<Eigen::Index>(j)) = unit(rng);
        inst.arms.push_back(std::move(mu));
        inst.weights.push_back(std::move(w));
    }
    inst.capacities = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i)
        inst.capacities[i] = config.ratio(static_cast<std::size_t>(i)) * static_cast<double>(config.T);
    finalize_instance(inst);
    return inst;
}

Instance generate_instance(const InstanceConfig& config) {
    Rng rng(config.seed);
    return generate_instance(config, rng);
}

Round sample_round(const Instance& inst, Rng& rng) {
    const auto d = inst.covariance_factor.rows();
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = standard_normal(rng);
    const double bound = inst.config.feature_bound;
    Round round;
    round.x = (inst.covariance_factor.triangularView<Eigen::Lower>() * z).cwiseMax(-bound).cwiseMin(bound);
    round.noise = Vector(static_cast<Eigen::Index>(inst.num_arms()));
    for (Eigen::Index a = 0; a < round.noise.size(); ++a)
        round.noise[a] = inst.config.sigma * standard_normal(rng);
    return round;
}

double expected_reward(const Instance& inst, std::size_t arm, const Vector& x) {
    if (arm == inst.null_arm()) return 0.0;
    return inst.arms.at(arm).dot(x);
}

double reward(const Instance& inst, std::size_t arm, const Round& round) {
    if (arm == inst.null_arm()) return 0.0;
    return inst.arms.at(arm).dot(round.x) + round.noise[static_cast<Eigen::Index>(arm)];
}

Vector clamped_consumption(const Matrix& weights, const Vector& x, double cap) {
    return (weights * x).cwiseMax(0.0).cwiseMin(cap);
}

Vector consumption(const Instance& inst, std::size_t arm, const Vector& x) {
    if (arm == inst.null_arm()) return Vector::Zero(static_cast<Eigen::Index>(inst.num_resources()));
    return clamped_consumption(inst.weights.at(arm), x, inst.consumption_bound);
}

Vector consumption(const Instance& inst, std::size_t arm, const Round& round) {
    return consumption(inst, arm, round.x);
}

std::size_t optimal_arm(const Instance& inst, const Vector& x) {
    std::size_t best = 0;
    double best_value = inst.arms.front().dot(x);
    for (std::size_t a = 1; a < inst.num_arms(); ++a) {
        const double v = inst.arms[a].dot(x);
        if (v > best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

namespace {

using nlohmann::json;

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json to_json(const Matrix& w) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) rows.push_back(to_json(Vector(w.row(i).transpose())));
    return rows;
}

Matrix matrix_from_json(const json& j, std::size_t cols) {
    Matrix w(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Vector row = vector_from_json(j[i]);
        if (static_cast<std::size_t>(row.size()) != cols) throw std::runtime_error("instance: bad weight row length");
        w.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return w;
}

} // namespace

void save_instance(std::ostream& out, const Instance& inst) {
    const auto& c = inst.config;
    json j;
    j["schema"] = kInstanceSchema;
    j["version"] = kInstanceSchemaVersion;
    j["config"] = {{"d", c.d},           {"K", c.K},
                   {"m", c.m},           {"T", c.T},
                   {"s0", c.s0},         {"sigma", c.sigma},
                   {"alpha", c.alpha},   {"feature_bound", c.feature_bound},
                   {"budget_ratio", c.budget_ratio},
                   {"signal_low", c.signal_low},
                   {"signal_high", c.signal_high},
                   {"seed", c.seed}};
    j["covariance"] = {{"kind", "power_decay"}, {"alpha", c.alpha}};
    j["capacities"] = to_json(inst.capacities);
    j["consumption_bound"] = inst.consumption_bound;
    json arms = json::array();
    for (std::size_t a = 0; a < inst.num_arms(); ++a)
        arms.push_back({{"mu", to_json(inst.arms[a])}, {"weights", to_json(inst.weights[a])}});
    j["arms"] = std::move(arms);
    out << j.dump(1) << '\n';
}

Instance load_instance(std::istream& in) {
    const json j = json::parse(in);
    if (j.at("schema").get<std::string>() != kInstanceSchema)
        throw std::runtime_error("instance: unexpected schema");
    if (j.at("version").get<int>() != kInstanceSchemaVersion)
        throw std::runtime_error("instance: unsupported schema version");
    Instance inst;
    const auto& c = j.at("config");
    auto& cfg = inst.config;
    cfg.d = c.at("d").get<std::size_t>();
    cfg.K = c.at("K").get<std::size_t>();
    cfg.m = c.at("m").get<std::size_t>();
    cfg.T = c.at("T").get<std::size_t>();
    cfg.s0 = c.at("s0").get<std::size_t>();
    cfg.sigma = c.at("sigma").get<double>();
    cfg.alpha = c.at("alpha").get<double>();
    cfg.feature_bound = c.at("feature_bound").get<double>();
    cfg.budget_ratio = c.at("budget_ratio").get<std::vector<double>>();
    cfg.signal_low = c.at("signal_low").get<double>();
    cfg.signal_high = c.at("signal_high").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.validate();

    inst.capacities = vector_from_json(j.at("capacities"));
    for (const auto& arm : j.at("arms")) {
        inst.arms.push_back(vector_from_json(arm.at("mu")));
        inst.weights.push_back(matrix_from_json(arm.at("weights"), cfg.d));
    }
    if (inst.arms.size() != cfg.K) throw std::runtime_error("instance: arm count does not match K");
    finalize_instance(inst);
    return inst;
}

} // namespace sparsebwk
