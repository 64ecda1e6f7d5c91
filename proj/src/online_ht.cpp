#include "sparsebwk/online_ht.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace sparsebwk {

std::string to_string(StepRule rule) {
    switch (rule) {
    case StepRule::theory: return "theory";
    case StepRule::lipschitz: return "lipschitz";
    }
    return "unknown";
}

StepRule step_rule_from_string(const std::string& name) {
    if (name == "theory") return StepRule::theory;
    if (name == "lipschitz") return StepRule::lipschitz;
    throw std::invalid_argument("unknown step rule: " + name);
}

std::size_t HtConfig::working_sparsity() const {
    const auto s = static_cast<std::size_t>(std::ceil(static_cast<double>(s0) / rho - 1e-12));
    return std::min(dim, std::max(s, s0));
}

double HtConfig::step_at(std::size_t t) const {
    if (warmup_rounds == 0 || t >= warmup_rounds) return eta;
    return eta * static_cast<double>(t) / static_cast<double>(warmup_rounds);
}

void HtConfig::validate() const {
    if (dim == 0) throw std::invalid_argument("HtConfig: dim must be >= 1");
    if (s0 == 0 || s0 > dim) throw std::invalid_argument("HtConfig: need 1 <= s0 <= dim");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("HtConfig: rho must lie in (0, 1]");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("HtConfig: eta must be > 0");
}

double default_step_size(const SpectralProfile& profile) {
    return 1.0 / (4.0 * profile.kappa * profile.phi_max);
}

double step_size(const SpectralProfile& profile, StepRule rule) {
    switch (rule) {
    case StepRule::theory: return default_step_size(profile);
    case StepRule::lipschitz: return 1.0 / (2.0 * profile.phi_max);
    }
    throw std::invalid_argument("unknown step rule");
}

HtConfig make_ht_config(const Matrix& covariance, std::size_t s0, double rho, StepRule rule,
                        bool warmup) {
    HtConfig cfg;
    cfg.dim = static_cast<std::size_t>(covariance.rows());
    cfg.s0 = s0;
    cfg.rho = rho;
    const std::size_t s = cfg.working_sparsity();
    cfg.eta = step_size(sparse_spectrum(covariance, s), rule);
    cfg.warmup_rounds = warmup ? 2 * s : 0;
    cfg.validate();
    return cfg;
}

OnlineHt::OnlineHt(const HtConfig& config, std::size_t arm) : config_(config), arm_(arm) {
    config_.validate();
    s_ = config_.working_sparsity();
    const auto d = static_cast<Eigen::Index>(config_.dim);
    cov_sum_ = Matrix::Zero(d, d);
    reward_sum_ = Vector::Zero(d);
    mu_ = Vector::Zero(d);
    mu_s_ = Vector::Zero(d);
}

OnlineHt OnlineHt::with_initial(const HtConfig& config, std::size_t arm, const Vector& mu0) {
    OnlineHt state(config, arm);
    if (static_cast<std::size_t>(mu0.size()) != config.dim)
        throw std::invalid_argument("OnlineHt: initial iterate has wrong dimension");
    state.mu_ = hard_threshold(mu0, state.s_);
    state.mu_s_ = hard_threshold(state.mu_, config.s0);
    return state;
}

void OnlineHt::update(const Vector& x, bool pulled, double p, std::optional<double> reward) {
    if (static_cast<std::size_t>(x.size()) != config_.dim)
        throw std::invalid_argument("OnlineHt::update: feature has wrong dimension");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("OnlineHt::update: p outside [0, 1]");
    if (pulled && p == 0.0)
        throw std::invalid_argument("OnlineHt::update: pulled with zero propensity");
    if (pulled && !reward) throw std::invalid_argument("OnlineHt::update: pulled without reward");

    ++t_;
    if (pulled) {
        const double w = 1.0 / p;
        cov_sum_.noalias() += (w * x) * x.transpose();
        reward_sum_.noalias() += (w * *reward) * x;
    }

    // S mu only touches the columns on supp(mu)
    Vector s_mu = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j < mu_.size(); ++j)
        if (mu_[j] != 0.0) s_mu.noalias() += cov_sum_.col(j) * mu_[j];

    const double scale = 2.0 / static_cast<double>(t_);
    const Vector gradient = scale * (s_mu - reward_sum_);
    double eta = config_.step_at(t_);
    Vector next = hard_threshold(mu_ - eta * gradient, s_);
    if (config_.backtrack) {
        // a small enough step always decreases the loss, so this terminates
        const double before = empirical_loss(mu_);
        const double slack = 1e-12 * (1.0 + std::abs(before));
        int halvings = 0;
        while (empirical_loss(next) > before + slack) {
            if (++halvings > 60) {
                next = mu_;
                break;
            }
            eta *= 0.5;
            next = hard_threshold(mu_ - eta * gradient, s_);
        }
        backtracks_ += static_cast<std::size_t>(halvings);
    }
    mu_ = std::move(next);
    mu_s_ = hard_threshold(mu_, config_.s0);
}

double OnlineHt::empirical_loss(const Vector& mu) const {
    if (t_ == 0) return 0.0;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < mu.size(); ++j)
        if (mu[j] != 0.0) idx.push_back(j);
    double quad = 0.0;
    for (auto i : idx) {
        double row = 0.0;
        for (auto j : idx) row += cov_sum_(i, j) * mu[j];
        quad += mu[i] * row;
    }
    return (quad - 2.0 * reward_sum_.dot(mu)) / static_cast<double>(t_);
}

Matrix OnlineHt::sigma_hat() const {
    if (t_ == 0) return Matrix::Zero(cov_sum_.rows(), cov_sum_.cols());
    return cov_sum_ / static_cast<double>(t_);
}

bool operator==(const OnlineHt& a, const OnlineHt& b) {
    return a.config_.dim == b.config_.dim && a.config_.s0 == b.config_.s0 &&
           a.config_.rho == b.config_.rho && a.config_.eta == b.config_.eta &&
           a.config_.warmup_rounds == b.config_.warmup_rounds && a.arm_ == b.arm_ &&
           a.config_.backtrack == b.config_.backtrack && a.s_ == b.s_ && a.t_ == b.t_ &&
           a.backtracks_ == b.backtracks_ && a.cov_sum_ == b.cov_sum_ &&
           a.reward_sum_ == b.reward_sum_ && a.mu_ == b.mu_ && a.mu_s_ == b.mu_s_;
}

namespace {

constexpr const char* kSnapshotHeader = "sparsebwk-online-ht-snapshot 1";

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i) out << ',';
        out << std::hexfloat << data[i] << std::defaultfloat;
    }
    out << '\n';
}

std::vector<double> read_values(std::istream& in, std::size_t expected) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("OnlineHt::load: truncated snapshot");
    std::vector<double> values;
    values.reserve(expected);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) throw std::runtime_error("OnlineHt::load: bad number '" + cell + "'");
        values.push_back(v);
    }
    if (values.size() != expected) throw std::runtime_error("OnlineHt::load: wrong value count");
    return values;
}

template <class T>
T read_field(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("OnlineHt::load: missing " + key);
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    if (name != key) throw std::runtime_error("OnlineHt::load: expected " + key + ", got " + name);
    if constexpr (std::is_same_v<T, double>) {
        std::string token;
        ss >> token;
        return std::strtod(token.c_str(), nullptr);
    } else {
        T value{};
        ss >> value;
        return value;
    }
}

} // namespace

void OnlineHt::save(std::ostream& out) const {
    out << kSnapshotHeader << '\n';
    out << "arm " << arm_ << '\n';
    out << "dim " << config_.dim << '\n';
    out << "s0 " << config_.s0 << '\n';
    out << "rho " << std::hexfloat << config_.rho << std::defaultfloat << '\n';
    out << "eta " << std::hexfloat << config_.eta << std::defaultfloat << '\n';
    out << "warmup " << config_.warmup_rounds << '\n';
    out << "backtrack " << (config_.backtrack ? 1 : 0) << '\n';
    out << "t " << t_ << '\n';
    out << "backtracks " << backtracks_ << '\n';
    out << "sigma_sum\n";
    write_values(out, cov_sum_.data(), cov_sum_.size());
    out << "reward_sum\n";
    write_values(out, reward_sum_.data(), reward_sum_.size());
    out << "mu\n";
    write_values(out, mu_.data(), mu_.size());
    out << "mu_s\n";
    write_values(out, mu_s_.data(), mu_s_.size());
}

OnlineHt OnlineHt::load(std::istream& in) {
    std::string header;
    std::getline(in, header);
    if (header != kSnapshotHeader) throw std::runtime_error("OnlineHt::load: bad header");
    HtConfig cfg;
    const auto arm = read_field<std::size_t>(in, "arm");
    cfg.dim = read_field<std::size_t>(in, "dim");
    cfg.s0 = read_field<std::size_t>(in, "s0");
    cfg.rho = read_field<double>(in, "rho");
    cfg.eta = read_field<double>(in, "eta");
    cfg.warmup_rounds = read_field<std::size_t>(in, "warmup");
    cfg.backtrack = read_field<int>(in, "backtrack") != 0;
    const auto t = read_field<std::size_t>(in, "t");
    const auto backtracks = read_field<std::size_t>(in, "backtracks");

    OnlineHt state(cfg, arm);
    state.t_ = t;
    state.backtracks_ = backtracks;
    const auto d = static_cast<std::size_t>(cfg.dim);
    auto expect_label = [&in](const char* label) {
        std::string line;
        std::getline(in, line);
        if (line != label) throw std::runtime_error(std::string("OnlineHt::load: expected ") + label);
    };
    expect_label("sigma_sum");
    auto cov = read_values(in, d * d);
    state.cov_sum_ = Eigen::Map<Matrix>(cov.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    expect_label("reward_sum");
    auto rs = read_values(in, d);
    state.reward_sum_ = Eigen::Map<Vector>(rs.data(), static_cast<Eigen::Index>(d));
    expect_label("mu");
    auto mu = read_values(in, d);
    state.mu_ = Eigen::Map<Vector>(mu.data(), static_cast<Eigen::Index>(d));
    expect_label("mu_s");
    auto mus = read_values(in, d);
    state.mu_s_ = Eigen::Map<Vector>(mus.data(), static_cast<Eigen::Index>(d));
    return state;
}

} // namespace sparsebwk
