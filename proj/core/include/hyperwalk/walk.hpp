#pragma once

#include "hyperwalk/cayley.hpp"
#include "hyperwalk/exact.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyperwalk {

// Symmetric probability measure on a generating set, indexed like the set.
class Measure {
public:
    Measure() = default;
    Measure(std::vector<Rational> exact, const GeneratorSet& gens);

    static Measure uniform(const GeneratorSet& gens);

    std::size_t size() const noexcept { return weights_.size(); }
    double weight(std::size_t s) const { return weights_.at(s); }
    const Rational& exact(std::size_t s) const { return exact_.at(s); }
    std::span<const double> weights() const noexcept { return weights_; }
    const std::vector<Rational>& exact_weights() const noexcept { return exact_; }
    std::size_t inverse(std::size_t s) const { return inverse_.at(s); }
    double min_weight() const;

private:
    std::vector<Rational> exact_;
    std::vector<double> weights_;
    std::vector<std::size_t> inverse_;
};

// Every generator label must appear exactly once with a positive weight.
Measure validate_measure(const GeneratorSet& gens,
                         const std::vector<std::pair<std::string, Rational>>& weights);

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct ConvolveOptions {
    int n_max = 0;
    std::vector<VertexId> watch;
    std::vector<std::uint8_t> forbidden; // empty or one flag per vertex
    bool keep_steps = false;
    bool accumulate = false;
    unsigned threads = 1;
};

// Convolution powers from x restricted to the ball. mass_n(v) is the weight of
// length-n paths from x to v that stayed in the ball (and off forbidden
// vertices); escaped[n] is the cumulative mass that left the ball by step n.
struct ConvolutionTable {
    VertexId source = 0;
    int n_max = 0;
    std::vector<double> escaped;
    std::vector<double> killed;
    std::vector<double> in_ball;
    std::vector<VertexId> watch;
    std::vector<std::vector<double>> watched;   // [watch index][n]
    std::vector<double> green_sums;             // per vertex, when accumulate
    std::vector<std::vector<double>> steps;     // [n][vertex], when keep_steps
    std::vector<double> final_mass;

    // Mass series of a watched vertex.
    std::span<const double> series(VertexId v) const;
    double mass(int n, VertexId v) const;
};

ConvolutionTable convolve(const Ball& ball, const Measure& mu, VertexId x, const ConvolveOptions& options);

// Envelope for the n-step transition probability between any two vertices:
// rho_plus^n, sharpened by p_{2m} rho_plus^{n-2m} when exact return
// probabilities p_{2m} are known.
struct TailPolicy {
    double rho_plus = 1.0;
    std::string provenance = "none";
    std::vector<double> returns; // exact p_n(x,x) for n < returns.size()

    bool bounded() const noexcept { return rho_plus < 1.0; }
    double envelope(int n) const;
    // Sum of envelope(n) over n > n_max; infinity when unbounded.
    double tail_after(int n_max) const;
};

struct GreenEstimate {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    int n_max = 0;
    int exact_horizon = 0;
    double rho_plus = 1.0;
    std::string rho_provenance;
    double escape_total = 0.0;
    std::string method = "escape+rho-envelope";

    bool bounded() const noexcept { return upper < std::numeric_limits<double>::infinity(); }
    double width() const noexcept { return upper - lower; }
};

// Bounds from the mass series at z of a table started at x.
GreenEstimate green_from_table(const Ball& ball, const ConvolutionTable& table, VertexId z,
                               const TailPolicy& tail);

// Bounds on P{path length >= m} under the Green path law from the table's
// source to z: the mass of steps >= m over the total mass.
struct PathLengthTail {
    int m = 0;
    double head_lower = 0.0; // sum over n < m
    double head_upper = 0.0;
    double rest_lower = 0.0; // sum over n >= m
    double rest_upper = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    double point = 0.0;      // walk killed on leaving the ball
};

PathLengthTail path_length_tail(const Ball& ball, const ConvolutionTable& table, VertexId z,
                                const TailPolicy& tail, int m);

struct SpectralEstimate {
    std::vector<double> root;   // root[n-1] = p_{2n}^{1/(2n)}
    std::vector<double> ratio;  // ratio[n-1] = (p_{2n}/p_{2n-2})^{1/2}, a lower bound for the killed operator norm
    double root_max = 0.0;
    double lower = 0.0;         // max over both sequences
    int n_max = 0;
    double escape_total = 0.0;
};

// n_max counts ρ̂ indices: returns after 2, 4, ..., 2*n_max steps from the center.
SpectralEstimate spectral_lower(const Ball& ball, const Measure& mu, int n_max, unsigned threads = 1);

// Exact return probabilities from the center (valid up to 2R+1 steps) and ρ⁺.
// Without a user value ρ⁺ = min(1 - 1e-6, best_lower / 0.98) from spectral_lower.
TailPolicy make_tail_policy(const Ball& ball, const Measure& mu, std::optional<double> rho_plus,
                            int spectral_n_max, unsigned threads = 1);

void require_transient(const GroupSpec& spec);

struct GreenSettings {
    int n_max = 200;
    unsigned threads = 1;
};

GreenEstimate green(const Ball& ball, const Measure& mu, VertexId x, VertexId z, const TailPolicy& tail,
                    const GreenSettings& settings);

// Paths avoiding the forbidden vertices; same tail discipline.
GreenEstimate green_killed(const Ball& ball, const Measure& mu, VertexId x, VertexId z,
                           std::span<const VertexId> forbidden, const TailPolicy& tail,
                           const GreenSettings& settings);

} // namespace hyperwalk
