#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmconv/functionals.hpp"
#include "lmconv/models.hpp"
#include "lmconv/path.hpp"
#include "lmconv/stopping.hpp"

namespace lmconv {

enum class CriterionTag {
    N,
    L,
    Aa,
    Ba,
    LM_A,
    LM_B,
    KazamakiMu,
    KazamakiNu,
    NovikovDelta,
    ExpmNu,
    FurtherC,
    FurtherE,
    FurtherG,
};

struct CriterionSpec {
    CriterionTag tag = CriterionTag::LM_A;
    double a = 0.0;
    /// Jump floor -1 + delta of the Novikov-type exponent.
    double delta = 0.5;
    /// Subtract U = (1-a) N for the A family or (1-a) L for the B family,
    /// leaving log Z.
    bool subtract_u = false;

    std::string name() const;
    /// Names: N, L, Aa, Ba, LM_A, LM_B, kazamaki_mu, kazamaki_nu,
    /// novikov_delta, expm_nu, further_c, further_e, further_g.
    static CriterionSpec parse(const std::string& name, double a = 0.0, double delta = 0.5);
};

/// A criterion process on [0, tau_0). Where a compensator integral diverges
/// the process is infinite from `divergence_time` on; `path` ends there.
struct CriterionPath {
    CadlagPath path;
    std::optional<double> divergence_time;
    /// +inf or -inf.
    double divergence_value = std::numeric_limits<double>::infinity();

    double value_at(double t) const;
    bool finite_at(double t) const { return !divergence_time || t < *divergence_time; }
};

/// M stopped strictly before its first jump of -1 (within the absorption
/// tolerance); later jumps are dropped and the absorption time recorded.
CadlagPath before_absorption(const CadlagPath& m);

CriterionPath criterion_path(const CriterionSpec& spec, const CadlagPath& m, const CompensatorSpec& comp);

CadlagPath process_N(const CadlagPath& m);
/// Raises CompensatorDiverges when the entropy compensator is infinite.
CadlagPath process_L(const CadlagPath& m, const CompensatorSpec& comp);
CadlagPath process_Aa(double a, const CadlagPath& m);
CadlagPath process_Ba(double a, const CadlagPath& m, const CompensatorSpec& comp);

struct IdentityDeviation {
    double max_dev_A = 0.0;
    double max_dev_B = 0.0;
};

/// Largest deviations of A^a - (log Z + (1-a) N) and B^a - (log Z + (1-a) L)
/// over values and left limits at every knot before absorption.
IdentityDeviation identity_check(double a, const CadlagPath& m, const CompensatorSpec& comp);

struct RuleEstimate {
    std::string rule;
    double mean = 0.0;
    double se = 0.0;
    double bootstrap_se = 0.0;
    std::size_t nonfinite = 0;
    std::size_t n = 0;
};

struct CriterionVerdict {
    std::string criterion;
    /// Largest rule estimate; a lower bound for the supremum over all
    /// stopping times.
    double sup_estimate = 0.0;
    std::string sup_rule;
    std::vector<RuleEstimate> per_rule;
    /// The supremum is stable when the family is coarsened.
    bool bounded_flag = false;
    /// Some sample overflowed or met an infinite compensator.
    bool diverged = false;
    std::size_t nonfinite_samples = 0;
    std::string notes;
};

struct ConditionOptions {
    std::size_t threads = 1;
    std::size_t bootstrap_resamples = 200;
};

/// Monte Carlo estimates of E_P[exp(C_sigma) 1{sigma < tau_0}] for every
/// rule of the family.
CriterionVerdict evaluate_condition(const ModelSpec& model, const CriterionSpec& criterion,
                                    const StoppingFamily& family, std::size_t n_paths, std::uint64_t seed,
                                    const ConditionOptions& options = {});

}  // namespace lmconv
