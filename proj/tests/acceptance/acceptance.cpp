#include "cli.hpp"

#include "hyperwalk/ancona.hpp"
#include "hyperwalk/criteria.hpp"
#include "hyperwalk/errors.hpp"
#include "hyperwalk/geometry.hpp"

#include "../support/oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperwalk;

namespace {

// Pinned tolerances and sizes.
constexpr int kGreenRadius = 12;          // radius 24 would need ~5.6e11 vertices
constexpr int kGreenSteps = 200;
constexpr double kRhoPlus = 0.87;
constexpr double kGreenWidth = 0.02;
constexpr double kGreenSeconds = 60.0;
constexpr double kDecayRelTol = 0.01;
constexpr int kSpectralRadiusF2 = 14;
constexpr int kSpectralStepsF2 = 200;
constexpr double kSpectralReachF2 = 0.85;
constexpr double kSpectralCapF2 = 0.8661;
constexpr int kSpectralRadiusZ3 = 40;
constexpr int kSpectralStepsZ3 = 100;
constexpr double kSpectralReachZ3 = 0.95;
constexpr double kTreeHitTol = 1e-6;
constexpr double kEnumerationTol = 1e-6;
constexpr int kEnumerationLength = 10;
constexpr double kConditionalTol = 1e-12;
constexpr int kConditionalLength = 8;
constexpr double kPiFlat = 4.0;
constexpr double kPiThreshold = 10.0;
constexpr double kHeightSlack = 4.0; // multiples of the grid step
constexpr double kDecayEpsilon = 0.1;
constexpr double kFlatBypassFloor = 1e-4;
constexpr std::size_t kSamplerDraws = 100000;
constexpr int kSamplerLength = 6;
constexpr double kChiSquareFloor = 1e-3;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Context {
    Group group;
    std::unique_ptr<Ball> ball;
    WalkContext walk;

    Context(const GroupSpec& spec, int radius, std::optional<double> rho, int n_max = kGreenSteps)
        : group(make_group(spec)) {
        ball = std::make_unique<Ball>(Ball::build(group, group.oracle.identity(), radius));
        walk.ball = ball.get();
        walk.mu = Measure::uniform(group.generators);
        walk.settings.n_max = n_max;
        walk.tail = make_tail_policy(*ball, walk.mu, rho, 60);
    }
    VertexId at(const std::string& w) const { return ball->require(group.oracle.evaluate(w)); }
    VertexId random_vertex(Rng& rng, int max_depth) const {
        return static_cast<VertexId>(rng.below(ball->sphere_end(max_depth)));
    }
};

Context& free_tree() {
    static Context ctx(GroupSpec::free(2), kGreenRadius, kRhoPlus);
    return ctx;
}

// Vertex on a uniformly chosen geodesic from x to z, at a uniform position.
VertexId geodesic_point(const Ball& ball, VertexId x, VertexId z, Rng& rng) {
    const GeodesicDag dag(ball, x, z);
    const auto w = dag.sample(rng);
    return w.vertices[rng.below(w.vertices.size())];
}

Outcome green_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    auto& f2 = free_tree();
    const auto g = green(*f2.ball, f2.walk.mu, 0, 0, f2.walk.tail, f2.walk.settings);
    const double secs = seconds_since(t0);
    const double exact = oracle::tree_green(3);
    const bool pass = g.lower <= exact && exact <= g.upper && g.lower <= 1.5 && 1.5 <= g.upper &&
                      g.width() <= kGreenWidth && secs <= kGreenSeconds;
    return {pass, fmt("G(e,e) in [%.6f, %.6f], width %.2e, oracle %.9f, radius %d, %.1f s", g.lower, g.upper,
                      g.width(), exact, kGreenRadius, secs)};
}

Outcome green_decay() {
    auto& f2 = free_tree();
    Rng rng(2, 0);
    std::vector<VertexId> targets;
    for (int d = 1; d <= 5; ++d) {
        const VertexId lo = f2.ball->sphere_begin(d), hi = f2.ball->sphere_end(d);
        if (hi - lo <= 12)
            for (VertexId v = lo; v < hi; ++v) targets.push_back(v);
        else
            for (int i = 0; i < 8; ++i) targets.push_back(lo + static_cast<VertexId>(rng.below(hi - lo)));
    }
    ConvolveOptions opt;
    opt.n_max = kGreenSteps;
    opt.watch = targets;
    opt.watch.push_back(0);
    const auto table = convolve(*f2.ball, f2.walk.mu, 0, opt);
    const double g0 = green_from_table(*f2.ball, table, 0, f2.walk.tail).lower;
    double worst = 0.0;
    for (VertexId v : targets) {
        const double ratio = green_from_table(*f2.ball, table, v, f2.walk.tail).lower / g0;
        const double expected = std::pow(3.0, -f2.ball->depth(v));
        worst = std::max(worst, std::abs(ratio / expected - 1.0));
    }
    return {worst <= kDecayRelTol,
            fmt("%zu targets with |g| <= 5, worst relative deviation from 3^-|g| = %.2e", targets.size(), worst)};
}

Outcome spectral_radius() {
    const Group f2 = make_group(GroupSpec::free(2));
    const Ball tree = Ball::build(f2, f2.oracle.identity(), kSpectralRadiusF2);
    const auto e = spectral_lower(tree, Measure::uniform(f2.generators), kSpectralStepsF2);
    double top = 0.0;
    for (std::size_t i = 0; i < e.root.size(); ++i) top = std::max({top, e.root[i], e.ratio[i]});

    const Group z3 = make_group(GroupSpec::free_abelian(3));
    const Ball lattice = Ball::build(z3, z3.oracle.identity(), kSpectralRadiusZ3);
    const auto l = spectral_lower(lattice, Measure::uniform(z3.generators), kSpectralStepsZ3);
    const bool pass = e.lower >= kSpectralReachF2 && top <= kSpectralCapF2 && l.lower >= kSpectralReachZ3;
    return {pass, fmt("Free(2) reaches %.5f (max %.5f, Kesten %.5f) with radius %d; FreeAbelian(3) reaches %.5f", e.lower,
                      top, oracle::kesten(2), kSpectralRadiusF2, l.lower)};
}

Outcome tree_hits() {
    Context f2(GroupSpec::free(2), 7, kRhoPlus);
    Rng rng(4, 0);
    double worst_wa = 0.0, worst_ta = 0.0;
    for (int i = 0; i < 100; ++i) {
        const VertexId x = f2.random_vertex(rng, 3);
        const VertexId z = f2.random_vertex(rng, 3);
        const VertexId y = geodesic_point(*f2.ball, x, z, rng);
        worst_wa = std::max(worst_wa, std::abs(1.0 - hit_probability_point(f2.walk, x, y, z).point));
        const int r = static_cast<int>(rng.below(3));
        worst_ta = std::max(worst_ta, std::abs(1.0 - hit_probability_ball(f2.walk, x, y, z, r).point));
    }
    return {worst_wa <= kTreeHitTol && worst_ta <= kTreeHitTol,
            fmt("100 geodesic triples: max |1 - WA| = %.2e, max |1 - TA| = %.2e", worst_wa, worst_ta)};
}

Outcome estimator_agreement() {
    const auto spec = GroupSpec::free(2).with_extra({"ab"});
    Context wide(spec, 6, std::nullopt, 150);
    Rng rng(5, 0);
    std::size_t overlaps = 0;
    for (int i = 0; i < 100; ++i) {
        const VertexId x = wide.random_vertex(rng, 2);
        const VertexId z = wide.random_vertex(rng, 2);
        const VertexId y = wide.random_vertex(rng, 2);
        const auto a = hit_probability_point(wide.walk, x, y, z);
        const auto b = hit_probability_point_killed(wide.walk, x, y, z);
        overlaps += std::max(a.lower, b.lower) <= std::min(a.upper, b.upper) + 1e-12;
    }

    // Both estimators truncated at the enumeration length, against exact sums.
    Context trunc(spec, 7, std::nullopt, kEnumerationLength);
    const PathEnumerator paths(trunc.group, trunc.walk.mu);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const VertexId x = trunc.random_vertex(rng, 1);
        const VertexId z = trunc.random_vertex(rng, 1);
        const VertexId y = trunc.random_vertex(rng, 1);
        const auto ex = trunc.ball->element(x), ey = trunc.ball->element(y), ez = trunc.ball->element(z);
        const auto G = [&](const GroupElement& u, const GroupElement& v) {
            return to_double(paths.sums(u, v, kEnumerationLength).total);
        };
        const std::vector<GroupElement> avoid{ey};
        const double identity = y == x || y == z ? 1.0 : G(ex, ey) * G(ey, ez) / (G(ey, ey) * G(ex, ez));
        const double killed =
            y == x || y == z ? 1.0 : 1.0 - to_double(paths.sums(ex, ez, kEnumerationLength, avoid).total) / G(ex, ez);
        worst = std::max(worst, std::abs(hit_probability_point(trunc.walk, x, y, z).point - std::min(1.0, identity)));
        worst = std::max(worst, std::abs(hit_probability_point_killed(trunc.walk, x, y, z).point - killed));
    }
    return {overlaps == 100 && worst <= kEnumerationTol,
            fmt("Free(2)+{ab}: %zu/100 interval overlaps; worst deviation from exact sums (L <= %d) = %.2e", overlaps,
                kEnumerationLength, worst)};
}

Outcome conditional_law() {
    const Group g = make_group(GroupSpec::free(2).with_extra({"ab"}));
    const PathEnumerator paths(g, Measure::uniform(g.generators));
    const auto& o = g.oracle;
    Rng rng(6, 0);
    const auto word = [&](std::size_t lo, std::size_t hi) {
        std::vector<GenIndex> w(lo + rng.below(hi - lo + 1));
        for (auto& s : w) s = static_cast<GenIndex>(rng.below(g.generators.size()));
        return w;
    };
    double worst = 0.0;
    int defined = 0;
    for (int i = 0; i < 50; ++i) {
        const auto sigma = word(1, 2);
        const auto theta = word(0, 2);
        auto frame = sigma;
        const auto phi = word(0, 2);
        frame.insert(frame.end(), phi.begin(), phi.end());
        frame.insert(frame.end(), theta.begin(), theta.end());
        const auto z = g.generators.evaluate(o, frame);

        PathPredicate event;
        switch (i % 3) {
        case 0: {
            const auto w = g.generators.evaluate(o, word(1, 2));
            event = [&g, w](std::span<const GenIndex> letters) {
                auto at = g.oracle.identity();
                for (GenIndex s : letters) {
                    at = g.oracle.multiply(at, g.generators.element(s));
                    if (at == w) return true;
                }
                return false;
            };
            break;
        }
        case 1: {
            const std::size_t cap = 3 + rng.below(5);
            event = [cap](std::span<const GenIndex> letters) { return letters.size() <= cap; };
            break;
        }
        default: {
            const auto s = static_cast<GenIndex>(rng.below(g.generators.size()));
            event = [s](std::span<const GenIndex> letters) {
                return std::find(letters.begin(), letters.end(), s) != letters.end();
            };
        }
        }
        const auto law = conditional_law_check(paths, o.identity(), z, sigma, theta, event, kConditionalLength);
        if (!law.defined) continue;
        ++defined;
        worst = std::max(worst, std::abs(to_double(law.lhs - law.rhs)));
    }
    return {defined == 50 && worst <= kConditionalTol,
            fmt("%d/50 instances defined, max |lhs - rhs| = %.1e (exact rationals)", defined, worst)};
}

Outcome pi_criterion() {
    const Group z2 = make_group(GroupSpec::free_abelian(2));
    bool flat = true;
    std::string values;
    for (int r = 2; r <= 6; ++r) {
        const int w = 3 * r - 1;
        const Ball ball = Ball::build(z2, z2.oracle.identity(), w);
        const auto v = [&](const std::string& s) { return ball.require(z2.oracle.evaluate(s)); };
        const std::string half(static_cast<std::size_t>(r / 2), 'A'), rest(static_cast<std::size_t>(r - r / 2), 'B');
        const std::string up(static_cast<std::size_t>(r / 2), 'a'), back(static_cast<std::size_t>(r - r / 2), 'b');
        const auto straight = pi_of_interval(ball, v(std::string(r, 'A')), 0, v(std::string(r, 'a')), w);
        const auto diagonal = pi_of_interval(ball, v(half + rest), 0, v(up + back), w);
        flat = flat && straight.exact && diagonal.exact && straight.pi == kPiFlat && diagonal.pi == kPiFlat;
        values += fmt(" %g/%g", straight.pi, diagonal.pi);
    }
    PiScanOptions opt;
    opt.r_list = {2, 3, 4, 5, 6};
    opt.samples = 10;
    opt.seed = 7;
    opt.slack = 0;
    const auto rows = pi_scan(make_group(GroupSpec::free(2)), opt);
    std::size_t sampled = 0, none = 0;
    for (const auto& row : rows) {
        sampled += row.samples;
        none += row.no_bypass;
    }
    return {flat && none == sampled,
            fmt("FreeAbelian(2) antipodal pi for r=2..6:%s (< %g); Free(2) no bypass in %zu/%zu intervals", values.c_str(),
                kPiThreshold, none, sampled)};
}

Outcome bigons() {
    BigonScanOptions opt;
    opt.L_max = 20;
    opt.seed = 8;
    const auto flat = bigon_scan(make_group(GroupSpec::free_abelian(2)), opt);
    bool linear = !flat.partial;
    for (int n = 2; n <= 10; ++n) linear = linear && flat.max_width[2 * n] == 2 * n;
    bool half_width = true;
    for (const auto& b : flat.bigons) half_width = half_width && b.half_width_holds;

    opt.L_max = 8;
    const auto tree = bigon_scan(make_group(GroupSpec::free(2)), opt);
    bool thin = !tree.partial;
    for (const auto& b : tree.bigons) thin = thin && b.max_width == 0 && b.half_width_holds;
    for (int w : tree.max_width) thin = thin && w == 0;
    return {linear && half_width && thin,
            fmt("FreeAbelian(2) max width at 2n = 2n for n=2..10: %s; %zu flat and %zu tree bigons; half-width bound %s",
                linear ? "yes" : "no", flat.bigons.size(), tree.bigons.size(), half_width ? "holds" : "fails")};
}

Outcome heights() {
    Rng rng(9, 0);
    constexpr double step = 0.25;
    double worst = -kInfinity;
    for (int i = 0; i < 200; ++i) {
        ProperFunction f;
        f.spacing = 0.5;
        const std::size_t n = 4 + rng.below(60);
        const double len = static_cast<double>(n) * f.spacing;
        double g = rng.uniform() * len;
        for (std::size_t j = 0; j <= n; ++j) {
            const double t = static_cast<double>(j) * f.spacing;
            f.samples.push_back(std::max(0.0, std::min({g, 2.0 * t, 2.0 * (len - t)})));
            g += (4.0 * rng.uniform() - 2.0) * f.spacing;
        }
        const double peak = *std::max_element(f.samples.begin(), f.samples.end());
        for (double k : {0.5, 1.0, 2.0}) {
            const auto h = height_hk(f, k, step);
            worst = std::max(worst, peak - (2 * k + 1) * h.h - kHeightSlack * step);
        }
    }
    const ProperFunction tent{{0.0, 1.0, 2.0, 1.0, 0.0}, 0.5};
    const auto h = height_hk(tent, 1.0, 0.5);
    return {worst <= 0.0 && h.h == 1.0,
            fmt("600 checks: max of f_max - (2k+1)h_k - 4 step = %.3f; tent h_1 = %g on [%g, %g]", worst, h.h, h.p, h.q)};
}

Outcome parameter_ledger() {
    const auto p = derive_parameters(2, 0.5, 4, 0.25, 1);
    const auto c = verify_parameters(p);
    const double k = (1.5 + 1.625) / 2;
    const bool thresholds = std::abs(p.m_spacing - 3.0 * 14 / k) < 1e-12 && p.m_radius == 3.0 &&
                            std::abs(p.m_condition_a - 8.0 / (2 * k - 3)) < 1e-12 &&
                            std::abs(p.m_condition_b - 12.0 * (8 * k + 1)) < 1e-12;
    const bool pass = std::abs(p.epsilon0 - 1.0 / 120) < 1e-15 && p.n == 15 && p.k_low == 1.5 && p.k_high == 1.625 &&
                      c.n_range && c.epsilon_budget && c.k_range && thresholds;
    return {pass, fmt("eps0 = %.6f, n = %d, k in (%g, %g), M thresholds %.4f/%g/%g/%g", p.epsilon0, p.n, p.k_low,
                      p.k_high, p.m_spacing, p.m_radius, p.m_condition_a, p.m_condition_b)};
}

Outcome bypass_decay() {
    Context f2(GroupSpec::free(2), 8, kRhoPlus);
    const auto tree = bypass_decay_check(f2.walk, {1, 2, 3}, kDecayEpsilon, 4, 10);
    bool zero = true;
    for (const auto& i : tree.instances) zero = zero && i.point == 0.0;

    Context z3(GroupSpec::free_abelian(3), 16, std::nullopt, 400);
    const auto flat = bypass_decay_check(z3.walk, {1, 2, 3}, kDecayEpsilon, 4, 10);
    double at3 = 0.0;
    for (const auto& i : flat.instances)
        if (i.size == 3) at3 = std::max(at3, i.point);
    const bool pass = tree.verdict == Verdict::ConsistentWithHyperbolic && zero && flat.verdict == Verdict::Violation &&
                      flat.witness && at3 >= kFlatBypassFloor;
    return {pass, fmt("Free(2) %s (bypass identically 0: %s); FreeAbelian(3) %s, r = 3 bypass %.3e vs eps^30, witness %s",
                      to_string(tree.verdict), zero ? "yes" : "no", to_string(flat.verdict), at3,
                      flat.witness ? flat.witness->c_str() : "-")};
}

Outcome na_inequality() {
    auto& f2 = free_tree();
    const double g = green(*f2.ball, f2.walk.mu, 0, 0, f2.walk.tail, f2.walk.settings).lower;
    const auto na = na_constants(oracle::kesten(2), f2.walk.mu.min_weight(), g);
    const auto r = na_check(f2.walk, na, {0, f2.at("a"), f2.at("ab")}, {10, 20, 40});
    double margin = kInfinity;
    for (const auto& i : r.instances) margin = std::min(margin, i.bound - i.upper);
    return {r.verdict == Verdict::ConsistentWithHyperbolic && r.instances.size() == 9 && margin > 0.0,
            fmt("9 instances, D = %.3f, N = %.3f, smallest margin bound - upper tail = %.3e", na.D, na.N, margin)};
}

Outcome sampler_fidelity() {
    Context f2(GroupSpec::free(2), 8, kRhoPlus);
    const VertexId z = f2.at("ab");
    const GreenPathSampler sampler(*f2.ball, f2.walk.mu, z, 400);
    const auto batch = sampler.sample(0, kSamplerDraws, 13);
    std::map<std::size_t, double> observed;
    double kept = 0.0;
    for (const auto& p : batch.paths)
        if (static_cast<int>(p.length()) <= kSamplerLength) {
            observed[p.length()] += 1.0;
            kept += 1.0;
        }
    const PathEnumerator paths(f2.group, f2.walk.mu);
    const auto sums = paths.sums(f2.group.oracle.identity(), f2.group.oracle.evaluate("ab"), kSamplerLength);
    const double total = to_double(sums.total);
    double chi2 = 0.0;
    int bins = 0;
    for (int n = 0; n <= kSamplerLength; ++n) {
        const double expected = kept * to_double(sums.per_length[n]) / total;
        if (expected == 0.0) {
            if (observed[n] > 0) chi2 = kInfinity;
            continue;
        }
        chi2 += (observed[n] - expected) * (observed[n] - expected) / expected;
        ++bins;
    }
    const double p = bins > 1 ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2)) : 0.0;
    return {p >= kChiSquareFloor, fmt("%zu draws (%zu rejected), %.0f with length <= %d, chi2 = %.2f on %d dof, p = %.3f",
                                      batch.paths.size(), batch.rejected, kept, kSamplerLength, chi2, bins - 1, p)};
}

Outcome reproducibility() {
    const cli::json doc = {{"group", {{"type", "free"}, {"rank", 2}}},
                           {"command", "report"},
                           {"seed", 17},
                           {"params", {{"green_radius", 7}, {"pi_r", {2, 3}}, {"pi_samples", 4}, {"bigon_L", 5}}}};
    auto config = cli::parse_config(doc);
    const auto base = std::filesystem::temp_directory_path() / "hyperwalk_acceptance";
    std::filesystem::remove_all(base);
    const std::function<std::string(const std::filesystem::path&)> strip = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        for (std::string line; std::getline(in, line);)
            if (line.find("\"timestamp\"") == std::string::npos) os << line << '\n';
        return os.str();
    };
    const std::function<std::string(const std::filesystem::path&)> bytes = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    const auto a = cli::run(config, base / "a");
    const auto b = cli::run(config, base / "b");
    config.threads = 8;
    const auto c = cli::run(config, base / "c");
    bool same = a.exit_code == 0 && b.exit_code == 0 && c.exit_code == 0;
    for (const char* name : {"report.json", "criteria.csv", "report.txt"}) {
        const auto reader = std::string(name) == "report.json" ? strip : bytes;
        same = same && reader(base / "a" / name) == reader(base / "b" / name) &&
               reader(base / "a" / name) == reader(base / "c" / name);
    }
    return {same, fmt("report.json (minus timestamp), criteria.csv, report.txt identical across 2 runs and threads 1/8: %s",
                      same ? "yes" : "no")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"green function oracle", green_oracle},
        {"green decay", green_decay},
        {"spectral radius", spectral_radius},
        {"point hits on trees", tree_hits},
        {"estimator cross-validation", estimator_agreement},
        {"conditional law", conditional_law},
        {"pi criterion", pi_criterion},
        {"bigon diagnostics", bigons},
        {"height property suite", heights},
        {"parameter ledger", parameter_ledger},
        {"bypass decay discrimination", bypass_decay},
        {"NA inequality", na_inequality},
        {"sampler fidelity", sampler_fidelity},
        {"reproducibility", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        failed += !out.pass;
        std::printf("%s %2zu %-28s %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    out.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
