#pragma once

#include "hyperwalk/walk.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperwalk {

struct PathWord {
    GroupElement start;
    std::vector<GenIndex> letters;

    std::size_t length() const noexcept { return letters.size(); }
    double weight(const Measure& mu) const;
    Rational exact_weight(const Measure& mu) const;
    GroupElement end(const Group& group) const;
    std::vector<GroupElement> trace(const Group& group) const;
};

struct ExactPathSums {
    std::vector<Rational> per_length; // index = path length
    Rational total;
};

// Exact rational sums over generator words, by dynamic programming on a
// ball around the identity. Not thread-safe: the ball grows lazily.
class PathEnumerator {
public:
    PathEnumerator(Group group, Measure mu, double budget = 1e12);

    // Sum of weights of words from x to z of length <= L_max whose trace avoids `avoid`.
    ExactPathSums sums(const GroupElement& x, const GroupElement& z, int L_max,
                       std::span<const GroupElement> avoid = {}) const;

    // Visits every word of length <= L_max that evaluates to g.
    void for_each_word(const GroupElement& g, int L_max,
                       const std::function<void(std::span<const GenIndex>)>& visit) const;

    const Group& group() const noexcept { return group_; }
    const Measure& measure() const noexcept { return mu_; }
    const ScaledWeights& scaled() const noexcept { return scaled_; }

private:
    // Ball around the identity covering every word of length <= L_max to g.
    const Ball& ball_for(const GroupElement& g, int L_max, bool& reachable) const;
    void check_budget(int L_max) const;

    Group group_;
    Measure mu_;
    ScaledWeights scaled_;
    double budget_;
    mutable std::optional<Ball> ball_;
};

ExactPathSums enumerate_paths(const Group& group, const Measure& mu, const GroupElement& x,
                              const GroupElement& z, int L_max, double budget = 1e12);

struct HitReport {
    std::string kind;   // "wa" | "ta" | "bypass"
    std::string method; // "identity-formula" | "killed-green" | "enumeration" | "monte-carlo"
    double lower = 0.0;
    double upper = 1.0;
    double point = 0.0; // value for the walk killed on leaving the ball
    int r = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

// Ball, measure and tail policy shared by the Green-based estimators.
struct WalkContext {
    const Ball* ball = nullptr;
    Measure mu;
    TailPolicy tail;
    GreenSettings settings;
};

// Gr(x,y) Gr(y,z) / (Gr(y,y) Gr(x,z)).
HitReport hit_probability_point(const WalkContext& ctx, VertexId x, VertexId y, VertexId z);
// 1 - Gr(x,z; avoid y) / Gr(x,z).
HitReport hit_probability_point_killed(const WalkContext& ctx, VertexId x, VertexId y, VertexId z);
// 1 - Gr(x,z; avoid B_{<=r}(y)) / Gr(x,z).
HitReport hit_probability_ball(const WalkContext& ctx, VertexId x, VertexId y, VertexId z, int r);
// Gr(x,z; avoid B_{<r}(y)) / Gr(x,z) for |x-z| = 2r; y defaults to the midpoint of
// the first enumerated geodesic.
HitReport bypass_probability(const WalkContext& ctx, VertexId x, VertexId z, int r,
                             std::optional<VertexId> y = std::nullopt);

// Vertices within distance r (or < r when open) of y; refuses when the ball cannot certify them.
std::vector<VertexId> ball_around(const Ball& ball, VertexId y, int r, bool open);

struct SampleBatch {
    std::vector<PathWord> paths;
    std::size_t rejected = 0;
    std::uint64_t seed = 0;
};

// Green path law from x to a fixed z by the Doob transform with h(w) = Gr(w,z)
// on the ball; walks reaching the outer sphere are rejected.
class GreenPathSampler {
public:
    GreenPathSampler(const Ball& ball, const Measure& mu, VertexId z, int n_max, unsigned threads = 1,
                     double max_reject_rate = 0.2);

    std::optional<PathWord> draw(VertexId x, Rng& rng, std::size_t max_length = 1u << 20) const;
    SampleBatch sample(VertexId x, std::size_t count, std::uint64_t seed) const;

    double green_to_target(VertexId w) const { return h_.at(w); }

private:
    const Ball* ball_;
    Measure mu_;
    VertexId z_;
    double max_reject_rate_;
    std::vector<double> h_;
};

PathWord sample_green_path(const GreenPathSampler& sampler, VertexId x, std::uint64_t seed);

using PathPredicate = std::function<bool(std::span<const GenIndex>)>;

struct ConditionalLaw {
    Rational lhs;
    Rational rhs;
    bool defined = false;
    std::size_t lhs_words = 0;
    std::size_t rhs_words = 0;
};

// P_{x,z}(event | words of the form sigma.phi.theta) versus
// P_{h}{phi : sigma.phi.theta in event}, h = pi(sigma^-1) x^-1 z pi(theta^-1),
// both over words of length <= L_max.
ConditionalLaw conditional_law_check(const PathEnumerator& paths, const GroupElement& x,
                                     const GroupElement& z, std::span<const GenIndex> sigma,
                                     std::span<const GenIndex> theta, const PathPredicate& event,
                                     int L_max);

} // namespace hyperwalk
