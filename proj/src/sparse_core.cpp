#include "sparsebwk/sparse_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sparsebwk {

SupportSet::SupportSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

SupportSet::SupportSet(std::initializer_list<std::size_t> indices)
    : SupportSet(std::vector<std::size_t>(indices)) {}

bool SupportSet::contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

SupportSet SupportSet::intersect(const SupportSet& other) const {
    std::vector<std::size_t> out;
    std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                          other.indices_.end(), std::back_inserter(out));
    SupportSet result;
    result.indices_ = std::move(out);
    return result;
}

bool SupportSet::is_subset_of(const SupportSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                         indices_.end());
}

Vector hard_threshold(const Vector& v, std::size_t s) {
    if (s == 0) throw std::invalid_argument("hard_threshold: s must be >= 1");
    const auto d = static_cast<std::size_t>(v.size());
    if (s >= d) return v;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // total order: larger magnitude first, lower index on ties
    auto before = [&v](std::size_t i, std::size_t j) {
        const double ai = std::abs(v[static_cast<Eigen::Index>(i)]);
        const double aj = std::abs(v[static_cast<Eigen::Index>(j)]);
        return ai > aj || (ai == aj && i < j);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s) - 1,
                     order.end(), before);

    Vector out = Vector::Zero(v.size());
    for (std::size_t k = 0; k < s; ++k) {
        const auto i = static_cast<Eigen::Index>(order[k]);
        out[i] = v[i];
    }
    return out;
}

SupportSet support(const Vector& v) {
    std::vector<std::size_t> idx;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) idx.push_back(static_cast<std::size_t>(i));
    return SupportSet(std::move(idx));
}

std::size_t count_nonzero(const Vector& v) {
    return static_cast<std::size_t>((v.array() != 0.0).count());
}

double support_recovery_rate(const Vector& estimate, const Vector& truth) {
    const SupportSet truth_support = support(truth);
    if (truth_support.empty())
        throw std::invalid_argument("support_recovery_rate: truth has no nonzero entry");
    const SupportSet hit = support(estimate).intersect(truth_support);
    return static_cast<double>(hit.size()) / static_cast<double>(truth_support.size());
}

namespace {

void check_symmetric(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("sparse_spectrum: matrix is not square");
    for (Eigen::Index i = 0; i < sigma.rows(); ++i)
        for (Eigen::Index j = i + 1; j < sigma.cols(); ++j)
            if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-10)
                throw std::invalid_argument("sparse_spectrum: matrix is not symmetric");
}

// Calls f(subset) for every size-k subset of {0..n-1}, lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        f(idx);
        std::size_t pos = k;
        while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
        if (pos == 0) return;
        ++idx[pos - 1];
        for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

SpectralProfile sparse_spectrum(const Matrix& sigma, std::size_t s) {
    if (s == 0) throw std::invalid_argument("sparse_spectrum: s must be >= 1");
    check_symmetric(sigma);
    const auto d = static_cast<std::size_t>(sigma.rows());
    if (d == 0) throw std::invalid_argument("sparse_spectrum: empty matrix");

    SpectralProfile profile;
    profile.level = s;
    profile.window = std::min(d, 2 * s);

    if (d <= kExactSpectrumMaxDim) {
        // Interlacing: a size-w principal submatrix's extreme eigenvalues
        // bracket those of every smaller one it contains, so size exactly w
        // covers all supports of size <= w.
        const std::size_t w = profile.window;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        Matrix sub(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
        Eigen::SelfAdjointEigenSolver<Matrix> solver;
        for_each_subset(d, w, [&](const std::vector<std::size_t>& idx) {
            for (std::size_t a = 0; a < w; ++a)
                for (std::size_t b = 0; b < w; ++b)
                    sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        sigma(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
            solver.compute(sub, Eigen::EigenvaluesOnly);
            lo = std::min(lo, solver.eigenvalues()[0]);
            hi = std::max(hi, solver.eigenvalues()[static_cast<Eigen::Index>(w) - 1]);
        });
        profile.phi_min = lo;
        profile.phi_max = hi;
        profile.exact = true;
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma, Eigen::EigenvaluesOnly);
        profile.phi_min = solver.eigenvalues()[0];
        profile.phi_max = solver.eigenvalues()[sigma.rows() - 1];
        profile.exact = false;
    }
    if (!(profile.phi_min > 0.0))
        throw std::invalid_argument("sparse_spectrum: matrix is not positive definite on the window");
    profile.kappa = profile.phi_max / profile.phi_min;
    return profile;
}

Matrix power_decay_covariance(std::size_t d, double alpha) {
    const auto n = static_cast<Eigen::Index>(d);
    Matrix sigma(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            sigma(i, j) = std::pow(alpha, static_cast<double>(std::abs(i - j)));
    return sigma;
}

} // namespace sparsebwk
