#include "lmconv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmconv/error.hpp"
#include "lmconv/rng.hpp"

namespace lmconv {

Estimate mean_estimate(const std::vector<double>& values) {
    Estimate e;
    e.n = values.size();
    if (values.empty()) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    if (!std::isfinite(e.mean)) {
        e.se = std::numeric_limits<double>::infinity();
        return e;
    }
    if (e.n < 2) return e;
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
    return e;
}

Estimate proportion(std::size_t hits, std::size_t n) {
    Estimate e;
    e.n = n;
    if (n == 0) return e;
    e.mean = static_cast<double>(hits) / static_cast<double>(n);
    e.se = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
    return e;
}

Estimate proportion(const std::vector<bool>& flags) {
    return proportion(static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)), flags.size());
}

double bootstrap_se(const std::vector<double>& values, std::size_t resamples, std::uint64_t seed,
                    std::uint64_t label) {
    const std::size_t n = values.size();
    if (n < 2 || resamples < 2) return 0.0;
    Substream rng(seed, label, StreamId::Bootstrap);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += values[static_cast<std::size_t>(rng() % n)];
        m = sum / static_cast<double>(n);
    }
    return mean_estimate(means).se * std::sqrt(static_cast<double>(resamples));
}

double z_score(const Estimate& a, const Estimate& b) {
    const double diff = std::abs(a.mean - b.mean);
    const double se = std::hypot(a.se, b.se);
    if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / se;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) fail(ErrorCode::InvalidParameters, "Kolmogorov-Smirnov needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    // c(0.01) = sqrt(-ln(0.005) / 2)
    r.critical_1pct = std::sqrt(-std::log(0.005) / 2.0) * std::sqrt((na + nb) / (na * nb));
    return r;
}

}  // namespace lmconv
