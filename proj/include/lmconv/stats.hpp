#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lmconv {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Sample mean and its normal-approximation standard error. Non-finite
/// values make both non-finite.
Estimate mean_estimate(const std::vector<double>& values);

/// Proportion of true flags with the binomial standard error.
Estimate proportion(const std::vector<bool>& flags);
Estimate proportion(std::size_t hits, std::size_t n);

/// Standard deviation of the resampled means, drawing from the bootstrap
/// substream of `seed`.
double bootstrap_se(const std::vector<double>& values, std::size_t resamples, std::uint64_t seed,
                    std::uint64_t label = 0);

/// |a - b| / sqrt(se_a^2 + se_b^2); +inf when both errors vanish and a != b.
double z_score(const Estimate& a, const Estimate& b);

struct KsResult {
    double statistic = 0.0;
    /// Asymptotic critical value at level 1%.
    double critical_1pct = 0.0;
    bool rejected() const { return statistic > critical_1pct; }
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace lmconv
