#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lmconv/criteria.hpp"
#include "lmconv/functionals.hpp"
#include "lmconv/path.hpp"

namespace lmconv {

/// A pure-jump path on [0, horizon] with an analytic atom compensator: at
/// each jump time the law puts mass 1/2 on the realised size and 1/2 on an
/// independent draw from the same range.
struct JumpCase {
    CadlagPath path;
    CompensatorSpec comp;
};

struct JumpCaseOptions {
    int max_jumps = 50;
    double lo = -0.9;
    double hi = 9.0;
    double horizon = 1.0;
};

/// Between 1 and max_jumps jumps at distinct uniform times; sizes are
/// uniform on (lo, 0) or (0, hi] with equal probability.
JumpCase random_jump_case(std::uint64_t seed, std::uint64_t index, const JumpCaseOptions& options = {});

/// max |E(M)_t E(N)_t - 1| over knot values and left limits, N the
/// reciprocal logarithm of M.
double reciprocal_deviation(const CadlagPath& m);

/// Largest relative gap |a - b| / max(1, |a|) between F * mu^M_t and
/// (F o phi) * mu^N_t at every jump time, for F in {x, x^2, log(1+x),
/// x - log(1+x)}.
double pushforward_deviation(const CadlagPath& m);

/// max |stoch_log(E(X)) - X| at knots, values and left limits.
double round_trip_deviation(const CadlagPath& x);

/// max |dY - log(1 + dX) - gamma| over the jumps of X.
double atom_log_jump_deviation(const CadlagPath& x, const CompensatorSpec& comp);

/// max |exp(Y - V) / E(X) - 1| at knots before absorption. The identity
/// holds when X is a local martingale whose jump part is x * (mu - nu).
double exp_log_transform_deviation(const CadlagPath& x, const CompensatorSpec& comp);

struct IdentitySuiteResult {
    std::size_t n_paths = 0;
    double reciprocal = 0.0;
    /// One entry per a in {-1, 0, 0.5, 2}.
    std::vector<double> a_values;
    std::vector<IdentityDeviation> lemma;
    double pushforward = 0.0;
    double round_trip = 0.0;
    double atom_log_jump = 0.0;
    /// Over the quasi-left-continuous presets ex-6.4, ex-6.3-2, ex-6.6 and bm.
    double qlc_log_transform = 0.0;
};

/// All deviations over `n_paths` random jump cases and `qlc_paths` paths of
/// each quasi-left-continuous preset.
IdentitySuiteResult identity_suite(std::size_t n_paths, std::uint64_t seed, std::size_t qlc_paths = 100,
                                   std::size_t threads = 1);

}  // namespace lmconv
