#include "dicke/dcs_basis.hpp"

#include "dicke/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace dicke {

namespace {

// Direct summation is trusted up to this index and while the largest term
// stays small enough that cancellation cannot cost more than ~1e-14.
constexpr int kDirectSumMaxIndex = 60;
constexpr double kDirectSumMaxTerm = 64.0;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const auto half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

bool odd(int n) { return (n & 1) != 0; }

}  // namespace

namespace detail {

double coupling_d_direct(int l, int k, double g, double* max_term) {
    if (l < 0 || k < 0) throw DomainError("coupling_d: negative index");
    if (g == 0.0) {
        if (max_term) *max_term = (l == k) ? 1.0 : 0.0;
        return l == k ? 1.0 : 0.0;
    }
    // Anchor the r = min(l, k) term in log space, then walk down with exact
    // term ratios t_{r-1} / t_r = -r g^2 / ((l - r + 1)(k - r + 1)).
    const double x = g * g;
    const int rmax = std::min(l, k);
    const double log_anchor = 0.5 * (log_factorial(l) + log_factorial(k)) + std::abs(l - k) * std::log(std::abs(g)) -
                              log_factorial(l - rmax) - log_factorial(k - rmax) - log_factorial(rmax) - 0.5 * x;
    std::vector<double> terms(static_cast<std::size_t>(rmax) + 1);
    double t = std::exp(log_anchor);
    if (odd(rmax)) t = -t;
    double biggest = 0.0;
    for (int r = rmax; r >= 0; --r) {
        terms[static_cast<std::size_t>(r)] = t;
        biggest = std::max(biggest, std::abs(t));
        if (r > 0) t *= -r * x / ((l - r + 1.0) * (k - r + 1.0));
    }
    if (max_term) *max_term = biggest;
    const double sum = pairwise_sum(terms);
    return (g < 0.0 && odd(l + k)) ? -sum : sum;
}

double displaced_overlap_laguerre(int l, int k, double d) {
    if (l < k) throw DomainError("displaced_overlap_laguerre: requires l >= k");
    if (k < 0) throw DomainError("displaced_overlap_laguerre: negative index");
    if (d == 0.0) return l == k ? 1.0 : 0.0;

    const int a = l - k;
    const double x = d * d;
    // L_n^{(a)}(x) by the forward three-term recurrence, rescaled to stay finite.
    double prev = 1.0;
    double cur = 1.0;
    double log_scale = 0.0;
    if (k >= 1) {
        cur = 1.0 + a - x;
        for (int n = 1; n < k; ++n) {
            const double next = ((2.0 * n + 1.0 + a - x) * cur - (n + a) * prev) / (n + 1.0);
            prev = cur;
            cur = next;
            if (std::abs(cur) > 1e150) {
                prev *= 1e-150;
                cur *= 1e-150;
                log_scale += 150.0 * std::log(10.0);
            }
        }
    }
    if (cur == 0.0) return 0.0;
    const double log_pref =
        0.5 * (log_factorial(k) - log_factorial(l)) + a * std::log(std::abs(d)) - 0.5 * x;
    double value = std::exp(std::log(std::abs(cur)) + log_scale + log_pref);
    if (cur < 0.0) value = -value;
    if (d < 0.0 && odd(a)) value = -value;
    return value;
}

}  // namespace detail

double coupling_d(int l, int k, double g) {
    if (l < 0 || k < 0) throw DomainError("coupling_d: negative index");
    if (std::max(l, k) <= kDirectSumMaxIndex) {
        double biggest = 0.0;
        const double direct = detail::coupling_d_direct(l, k, g, &biggest);
        if (biggest <= kDirectSumMaxTerm) return direct;
    }
    // D_{l,k}(G) = (-1)^k <l|D(G)|k>, and D is symmetric in (l, k).
    const int hi = std::max(l, k);
    const int lo = std::min(l, k);
    const double v = detail::displaced_overlap_laguerre(hi, lo, g);
    return odd(lo) ? -v : v;
}

OverlapKernel coupling_kernel(double g, int n_tr) {
    if (n_tr < 0) throw DomainError("coupling_kernel: negative truncation");
    if (!(g >= 0.0)) throw DomainError("coupling_kernel: G must be non-negative");
    OverlapKernel kernel{g, KernelConvention::Coupling, Eigen::MatrixXd(n_tr + 1, n_tr + 1)};
    for (int l = 0; l <= n_tr; ++l) {
        for (int k = 0; k <= l; ++k) {
            const double v = coupling_d(l, k, g);
            kernel.table(l, k) = v;
            kernel.table(k, l) = v;
        }
    }
    return kernel;
}

double generic_overlap(int l, int k, double d) {
    if (l < 0 || k < 0) throw DomainError("generic_overlap: negative index");
    if (l >= k) return detail::displaced_overlap_laguerre(l, k, d);
    const double v = detail::displaced_overlap_laguerre(k, l, d);
    return odd(k - l) ? -v : v;
}

OverlapKernel generic_kernel(double d, int n_tr) {
    if (n_tr < 0) throw DomainError("generic_kernel: negative truncation");
    OverlapKernel kernel{d, KernelConvention::Generic, Eigen::MatrixXd(n_tr + 1, n_tr + 1)};
    for (int l = 0; l <= n_tr; ++l) {
        for (int k = 0; k <= l; ++k) {
            const double v = detail::displaced_overlap_laguerre(l, k, d);
            kernel.table(l, k) = v;
            kernel.table(k, l) = odd(l - k) ? -v : v;
        }
    }
    return kernel;
}

double unitarity_defect(const OverlapKernel& kernel) {
    const int n_tr = kernel.n_tr();
    double worst = 0.0;
    for (int l = 0; l <= n_tr / 2; ++l)
        worst = std::max(worst, std::abs(1.0 - kernel.table.row(l).squaredNorm()));
    return worst;
}

std::shared_ptr<const OverlapKernel> cached_kernel(double delta, int n_tr, KernelConvention convention) {
    using Key = std::tuple<double, int, int>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const OverlapKernel>> cache;
    constexpr std::size_t kMaxEntries = 256;

    const Key key{delta, n_tr, static_cast<int>(convention)};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto kernel = std::make_shared<const OverlapKernel>(
        convention == KernelConvention::Coupling ? coupling_kernel(delta, n_tr) : generic_kernel(delta, n_tr));
    std::lock_guard lock(mutex);
    if (cache.size() >= kMaxEntries) cache.clear();
    cache.emplace(key, kernel);
    return kernel;
}

}  // namespace dicke
