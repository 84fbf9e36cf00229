#pragma once

// Small random generators for property tests. Every property runs a fixed
// number of cases from a fixed seed and reports the failing case index.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lmconv/functionals.hpp"
#include "lmconv/path.hpp"

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

private:
    std::mt19937_64 engine_;
};

struct PathShape {
    int max_jumps = 30;
    double lo = -0.95;
    double hi = 5.0;
    double horizon = 4.0;
    bool drift = true;
    bool diffusion = false;
};

/// Jumps at distinct times in (0, horizon) with sizes in (lo, hi), a few
/// drift pieces and optionally a sampled Brownian part.
inline lmconv::CadlagPath path(Rng& r, const PathShape& s = {}) {
    lmconv::PathBuilder b(s.horizon);
    b.set_initial(r.uniform(-1.0, 1.0));
    const int jumps = r.integer(0, s.max_jumps);
    for (int k = 0; k < jumps; ++k) {
        double size = r.uniform(s.lo, s.hi);
        if (size == 0.0) size = 0.5;
        b.add_jump(r.uniform(0.0, s.horizon), size);
    }
    if (s.drift)
        for (int k = r.integer(0, 3); k > 0; --k) {
            const double a = r.uniform(0.0, s.horizon);
            b.add_drift(a, std::min(s.horizon, a + r.uniform(0.1, 2.0)), r.uniform(-1.0, 1.0));
        }
    if (s.diffusion) {
        lmconv::DiffusionGrid g;
        g.start = 0.0;
        g.step = s.horizon / 64.0;
        const double rate = r.uniform(0.1, 2.0);
        for (int k = 0; k < 64; ++k) g.increments.push_back(std::sqrt(rate * g.step) * r.normal());
        b.set_continuous_part(rate, 0.0, g);
    }
    return b.build();
}

/// A law with mass one and mean zero on two to four points above -1.
inline std::vector<lmconv::AtomPoint> mean_zero_law(Rng& r) {
    const double up = r.uniform(0.05, 4.0);
    const double down = -r.uniform(0.05, 0.95);
    std::vector<lmconv::AtomPoint> pts{{up, -down / (up - down)}, {down, up / (up - down)}};
    if (r.chance(0.5)) {
        const double keep = r.uniform(0.05, 0.5);
        for (auto& p : pts) p.mass *= 1.0 - keep;
        const double a = r.uniform(-0.9, 2.0);
        const double b = r.uniform(-0.9, 2.0);
        // A mean-zero pair a, b with a != b carries the remaining mass.
        if (a * b < 0.0) {
            pts.push_back({a, keep * b / (b - a)});
            pts.push_back({b, keep * a / (a - b)});
        } else {
            pts.push_back({0.0, keep});
        }
    }
    return pts;
}

template <class F>
void for_all(int cases, std::uint64_t seed, F&& property) {
    Rng r(seed);
    for (int i = 0; i < cases; ++i) {
        SCOPED_TRACE("case " + std::to_string(i) + " of seed " + std::to_string(seed));
        property(r);
        if (::testing::Test::HasFatalFailure()) return;
    }
}

}  // namespace gen
