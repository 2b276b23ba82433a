#pragma once

#include "hyperwalk/cayley.hpp"
#include "hyperwalk/parameters.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hyperwalk {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Geodesic interval [x,z] of length 2r with midpoint y, and the shortest
// path from x to z through vertices at distance >= r from y.
struct IntervalRecord {
    VertexId x = 0;
    VertexId y = 0;
    VertexId z = 0;
    int r = 0;
    int working_radius = 0;
    std::optional<int> bypass;   // shortest bypass inside the working region
    bool exact = false;          // bypass is the global infimum
    double pi = kInfinity;       // exact value, or a lower bound when !exact
    double pi_upper = kInfinity;
    std::vector<VertexId> path;

    // "bypass" | "lower-bound" | "no-bypass-within"
    std::string status() const;
};

// The ball must contain B(y, working_radius) with every geodesic, i.e.
// depth(y) + working_radius <= R.
IntervalRecord pi_of_interval(const Ball& ball, VertexId x, VertexId y, VertexId z, int working_radius);

struct PiScanOptions {
    std::vector<int> r_list;
    std::size_t samples = 20;
    std::uint64_t seed = 0;
    int slack = -1;               // working radius 2r + slack; -1 means r - 1
    std::optional<double> delta;  // Gromov comparison curve delta(2^{r/delta} - 2)
    std::size_t memory_cap = kDefaultMemoryCap;
};

struct PiScanRow {
    int r = 0;
    int working_radius = 0;
    std::size_t samples = 0;
    std::size_t no_bypass = 0;
    std::size_t exact = 0;
    double min_pi = kInfinity;    // no-bypass samples count as infinity
    double median_pi = kInfinity;
    std::optional<double> gromov_bound;
    std::vector<IntervalRecord> intervals;
    std::vector<std::string> labels; // "x|y|z" normal forms, one per interval
};

// Random geodesic intervals of length 2r, translated so the midpoint is the identity.
std::vector<PiScanRow> pi_scan(const Group& group, const PiScanOptions& options);

struct BigonRecord {
    GroupElement start;
    std::vector<GenIndex> side0;
    std::vector<GenIndex> side1;
    int length = 0;              // integer part; half_edge adds 1/2
    bool half_edge = false;      // sides end at the midpoint of an edge between their last vertices
    std::vector<int> widths;     // |side0(s) - side1(s)|, s = 0..length
    int max_width = 0;
    int hausdorff_width = 0;
    bool regular = false;
    bool normalized = true;
    bool half_width_holds = true; // dist(side_i(s), other side) >= widths[s] / 2 everywhere
};

struct BigonScanOptions {
    int L_max = 6;
    std::size_t budget = 200000;      // bigon pairs
    std::uint64_t seed = 0;
    std::size_t sphere_limit = 4096;  // whole sphere scanned below this size
    std::size_t endpoint_samples = 256;
    std::size_t pair_enum_limit = 8;  // all pairs when at most this many geodesics
    std::size_t random_pairs = 4;
    int metric_radius = -1;           // -1 means 2 * L_max
    bool half_edges = true;
    std::size_t memory_cap = kDefaultMemoryCap;
};

struct BigonScan {
    std::vector<BigonRecord> bigons;
    std::vector<int> max_width;  // per length 0..L_max
    std::vector<std::size_t> count;
    bool partial = false;
    std::string partial_reason;
};

BigonScan bigon_scan(const Group& group, const BigonScanOptions& options);

// Word distance |g^-1 h| through a ball around the identity; nullopt beyond its radius.
std::optional<int> metric_distance(const Ball& metric, const GroupElement& g, const GroupElement& h);

// Samples of f on [0, spacing * (size - 1)].
struct ProperFunction {
    std::vector<double> samples;
    double spacing = 1.0;

    double length() const noexcept;
    double operator()(double t) const;
    // f(0) = f(L) = 0, f >= 0, 2-Lipschitz; empty string when valid.
    std::string check(double tol = 1e-9) const;
};

struct HeightResult {
    double k = 0.0;
    double h = 0.0;
    double p = 0.0;
    double q = 0.0;
    double grid_step = 0.0;
};

HeightResult height_hk(const ProperFunction& f, double k, double grid_step);

// Width function of a bigon at half-integer spacing.
ProperFunction width_function(const BigonRecord& bigon);

struct ParadoxCertificate {
    double M = 0.0;
    double p = 0.0;
    double q = 0.0;
    double L = 0.0;
    double d = 0.0;
    std::vector<double> T;
    std::vector<GroupElement> centers; // side 0 then side 1
    bool window_ok = false;
    bool spacing_ok = false;
    bool radius_ok = false;
    bool separation_ok = false;
    bool a_threshold_ok = false;
    bool b_threshold_ok = false;
    bool disjoint = false;
    bool paradoxical = false;
    std::string summary;
};

// `metric` is a ball around the identity with radius >= 2r.
ParadoxCertificate paradox_certificate(const BigonRecord& bigon, const ParadoxParameters& params,
                                       const Ball& metric, double grid_step = 0.5);

} // namespace hyperwalk
