#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace sparsebwk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ordered set of coordinate indices. Indices are strictly increasing.
class SupportSet {
public:
    SupportSet() = default;
    /// Accepts indices in any order; duplicates are removed.
    explicit SupportSet(std::vector<std::size_t> indices);
    SupportSet(std::initializer_list<std::size_t> indices);

    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    bool contains(std::size_t i) const;
    const std::vector<std::size_t>& indices() const { return indices_; }

    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }

    SupportSet intersect(const SupportSet& other) const;
    bool is_subset_of(const SupportSet& other) const;

    friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// Extreme Rayleigh quotients of a covariance over vectors with at most
/// `window` nonzeros, window = min(d, 2s). When `exact` is false the values
/// are the full-matrix eigenvalues, i.e. phi_min is a lower bound and phi_max
/// an upper bound on the sparse quantities.
struct SpectralProfile {
    double phi_min = 1.0;
    double phi_max = 1.0;
    double kappa = 1.0;
    std::size_t level = 1;
    std::size_t window = 2;
    bool exact = true;
};

/// Keeps the s largest-magnitude entries of v and zeros the rest. Ties at the
/// cut go to the lower index. Throws std::invalid_argument when s == 0.
Vector hard_threshold(const Vector& v, std::size_t s);

/// Indices of the nonzero entries of v.
SupportSet support(const Vector& v);

/// |supp(estimate) ∩ supp(truth)| / |supp(truth)|. Throws on all-zero truth.
double support_recovery_rate(const Vector& estimate, const Vector& truth);

/// Number of nonzero entries.
std::size_t count_nonzero(const Vector& v);

/// Exact enumeration over supports when d <= kExactSpectrumMaxDim, otherwise
/// full-matrix eigenvalue bounds. Throws std::invalid_argument for a
/// non-square or asymmetric (tolerance 1e-10) matrix, or s == 0.
SpectralProfile sparse_spectrum(const Matrix& sigma, std::size_t s);

inline constexpr std::size_t kExactSpectrumMaxDim = 20;

/// Sigma_ij = alpha^|i-j|.
Matrix power_decay_covariance(std::size_t d, double alpha);

} // namespace sparsebwk
