#pragma once

#include "hyperwalk/ancona.hpp"
#include "hyperwalk/geometry.hpp"
#include "hyperwalk/parameters.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hyperwalk {

enum class Verdict { ConsistentWithHyperbolic, Violation, Inconclusive };

const char* to_string(Verdict v) noexcept;

// k defaults to the midpoint of ((A+1)/2, (n-2)/(2B)).
ParadoxParameters derive_parameters(double A, double a, double B, double b, int r,
                                    std::optional<double> k = std::nullopt);

struct ParameterChecks {
    double epsilon = 0.0;
    bool n_range = false;        // AB+B+2 < n <= AB+B+3
    bool epsilon_budget = false; // 2 n eps < 1-a-b
    bool k_range = false;        // (A+1)/2 < k < (n-2)/(2B)
};

// epsilon defaults to epsilon0 / 2.
ParameterChecks verify_parameters(const ParadoxParameters& p, std::optional<double> epsilon = std::nullopt);

struct NAConstants {
    double rho = 0.0;
    double lambda = 0.0;
    double green = 0.0; // Gr(x,x) used for N
    double D = 0.0;
    double N = 0.0;

    // rho^{m - D d - N}
    double bound(int m, int d) const;
};

NAConstants na_constants(double rho, double lambda, double green_at_identity);

// One sampled instance of a criterion.
struct InstanceRecord {
    std::string label;
    int size = 0;         // |g|, r or L depending on the criterion
    int threshold = 0;    // path length m, when relevant
    double lower = 0.0;
    double upper = 1.0;
    double point = 0.0;
    double bound = 0.0;
    bool violation = false;
    bool certified = false; // the verdict on this instance follows from the bounds alone
};

struct CriterionReport {
    std::string criterion; // ConditionA | ConditionB | NA | BypassDecay | PiCriterion | BigonBound
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<InstanceRecord> instances;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<std::string> witness;
    std::string caveat;
    double statistic = 0.0;
};

struct TailSampling {
    std::vector<int> c_list{1, 2, 3};
    std::size_t per_sphere = 4;
    std::uint64_t seed = 0;
};

// Sampled targets g with |g| <= c, c in c_list, including the identity.
std::vector<std::pair<VertexId, int>> sample_targets(const Ball& ball, const TailSampling& sampling);

// P_{e,g}{length >= A c} over the sampled targets; statistic is the largest upper bound.
// With `a` the verdict compares against it, otherwise against 1.
CriterionReport estimate_condition_A(const WalkContext& ctx, double A, const TailSampling& sampling,
                                     std::optional<double> a = std::nullopt);

CriterionReport estimate_condition_B(const WalkContext& ctx, double A, double a, double B, double b,
                                     const TailSampling& sampling);

// A = D + N + 1, a = rho, and the smallest B > max(D, 2) on a 1/16 grid with
// B rho^{B-D-N} < b / (2(A+2)).
struct TailParameters {
    double A = 0.0;
    double a = 0.0;
    double B = 0.0;
    double b = 0.0;
};

TailParameters tail_parameters(const NAConstants& na, double b_fraction = 0.5);

// Tails at targets g and lengths m against rho^{m - D|g| - N}; m < |g| is skipped.
CriterionReport na_check(const WalkContext& ctx, const NAConstants& na, const std::vector<VertexId>& targets,
                         const std::vector<int>& m_list);

// Bypass probability of sampled intervals of length 2r from the ball center against epsilon^{10r}.
CriterionReport bypass_decay_check(const WalkContext& ctx, const std::vector<int>& r_list, double epsilon,
                               std::size_t samples, std::uint64_t seed);

struct TaToWa {
    double raw = 0.0;
    double value = 0.0;
    bool out_of_range = false;
};

// 1 - (1 - eps) L^{2r} |B|, clamped to [0, 1].
TaToWa ta_to_wa(double epsilon, int r, double harnack_L, std::size_t ball_size);

struct HarnackEstimate {
    double L = 0.0;
    std::string pair; // witness "y,ys"
    std::size_t pairs = 0;
};

// Largest Gr(e,y)/Gr(e,ys) over adjacent pairs with |y| <= max_depth, from in-ball Green sums.
HarnackEstimate estimate_harnack(const WalkContext& ctx, int max_depth);

struct ReportConfig {
    int green_radius = 10;
    std::optional<double> rho_plus;
    int spectral_n_max = 60;
    GreenSettings settings;
    std::vector<int> pi_r{2, 3, 4};
    std::size_t pi_samples = 8;
    int bigon_L = 8;
    std::vector<int> decay_r{1, 2, 3};
    double epsilon = 0.1;
    std::size_t decay_samples = 4;
    std::optional<double> A;
    std::optional<double> a;
    std::optional<double> B;
    std::optional<double> b;
    TailSampling tails;
    std::uint64_t seed = 0;
};

struct HyperbolicityReport {
    std::vector<CriterionReport> criteria;
    Verdict overall = Verdict::Inconclusive;
    std::string caveat;
};

HyperbolicityReport hyperbolicity_report(const Group& group, const Measure& mu, const ReportConfig& config);

} // namespace hyperwalk
