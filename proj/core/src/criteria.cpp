#include "hyperwalk/criteria.hpp"

#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyperwalk {

namespace {

constexpr const char* kFiniteCaveat =
    "finite-radius evidence from sampled instances; not a proof in either direction";

// Violation when any instance violates; consistent otherwise.
void settle(CriterionReport& report) {
    report.verdict = Verdict::ConsistentWithHyperbolic;
    std::size_t uncertified = 0;
    for (const auto& inst : report.instances) {
        if (!inst.certified) ++uncertified;
        if (inst.violation && !report.witness) {
            report.verdict = Verdict::Violation;
            report.witness = inst.label;
        }
    }
    report.caveat = kFiniteCaveat;
    if (uncertified > 0)
        report.caveat += "; " + std::to_string(uncertified) + " instance(s) decided by point estimates only";
}

ConvolutionTable table_from_center(const WalkContext& ctx, std::vector<VertexId> watch, bool accumulate = false) {
    ConvolveOptions opt;
    opt.n_max = ctx.settings.n_max;
    opt.watch = std::move(watch);
    opt.threads = ctx.settings.threads;
    opt.accumulate = accumulate;
    return convolve(*ctx.ball, ctx.mu, 0, opt);
}

int ceil_length(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

CriterionReport tail_report(const WalkContext& ctx, const std::string& name, double factor, double bound,
                            const TailSampling& sampling) {
    require_transient(ctx.ball->oracle().spec());
    const auto targets = sample_targets(*ctx.ball, sampling);
    std::vector<VertexId> watch;
    for (const auto& t : targets) watch.push_back(t.first);
    std::sort(watch.begin(), watch.end());
    watch.erase(std::unique(watch.begin(), watch.end()), watch.end());
    const auto table = table_from_center(ctx, watch);

    CriterionReport report;
    report.criterion = name;
    for (const auto& [g, c] : targets) {
        const int m = ceil_length(factor * c);
        const auto tail = path_length_tail(*ctx.ball, table, g, ctx.tail, m);
        InstanceRecord inst;
        inst.label = "g=" + ctx.ball->format(g) + " c=" + std::to_string(c);
        inst.size = ctx.ball->depth(g);
        inst.threshold = m;
        inst.lower = tail.lower;
        inst.upper = tail.upper;
        inst.point = tail.point;
        inst.bound = bound;
        inst.violation = tail.point > bound;
        inst.certified = tail.lower > bound || tail.upper <= bound;
        report.statistic = std::max(report.statistic, tail.upper);
        report.instances.push_back(std::move(inst));
    }
    return report;
}

} // namespace

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::ConsistentWithHyperbolic:
        return "ConsistentWithHyperbolic";
    case Verdict::Violation:
        return "Violation";
    case Verdict::Inconclusive:
        return "Inconclusive";
    }
    return "Inconclusive";
}

double ParadoxParameters::m_required() const noexcept { return std::max({m_spacing, m_radius, m_condition_a, m_condition_b}); }

ParadoxParameters derive_parameters(double A, double a, double B, double b, int r, std::optional<double> k) {
    if (!(A > 0.0) || !(B > 0.0)) throw InvalidInput("A and B must be positive");
    if (!(a > 0.0 && a < 1.0)) throw InvalidInput("a must lie in (0, 1)");
    if (!(b > 0.0)) throw InvalidInput("b must be positive");
    if (!(b < 1.0 - a)) throw InvalidInput("b must be below 1 - a");
    if (r < 0) throw InvalidInput("r must be non-negative");

    ParadoxParameters p;
    p.A = A;
    p.a = a;
    p.B = B;
    p.b = b;
    p.r = r;
    p.epsilon0 = (1.0 - a - b) / (2.0 * (A * B + B + 3.0));
    p.n = static_cast<int>(std::floor(A * B + B + 2.0)) + 1;
    p.k_low = (A + 1.0) / 2.0;
    p.k_high = (p.n - 2.0) / (2.0 * B);
    if (!(p.k_low < p.k_high)) throw Error("empty k interval");
    if (k) {
        if (!(*k > p.k_low && *k < p.k_high)) throw InvalidInput("k must lie in ((A+1)/2, (n-2)/(2B))");
        p.k = *k;
    } else {
        p.k = 0.5 * (p.k_low + p.k_high);
    }
    p.m_spacing = (2.0 * r + 1.0) * (p.n - 1) / p.k;
    p.m_radius = 2.0 * r + 1.0;
    p.m_condition_a = std::max(1.0, 2.0 * r * (A + 2.0) / (2.0 * p.k - A - 1.0));
    p.m_condition_b = 2.0 * r * (B + 2.0) * (2.0 * p.k * B + 1.0);
    return p;
}

ParameterChecks verify_parameters(const ParadoxParameters& p, std::optional<double> epsilon) {
    ParameterChecks c;
    c.epsilon = epsilon.value_or(p.epsilon0 / 2.0);
    const double base = p.A * p.B + p.B + 2.0;
    c.n_range = base < p.n && p.n <= base + 1.0;
    c.epsilon_budget = 2.0 * p.n * c.epsilon < 1.0 - p.a - p.b;
    c.k_range = p.k_low < p.k && p.k < p.k_high;
    return c;
}

double NAConstants::bound(int m, int d) const { return std::pow(rho, m - D * d - N); }

NAConstants na_constants(double rho, double lambda, double green_at_identity) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("the NA inequality needs rho_plus < 1");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in (0, 1]");
    if (!(green_at_identity >= 1.0)) throw InvalidInput("Gr(e,e) must be at least 1");
    NAConstants na;
    na.rho = rho;
    na.lambda = lambda;
    na.green = green_at_identity;
    na.D = std::log(lambda) / std::log(rho);
    na.N = std::log(green_at_identity * (1.0 - rho)) / std::log(rho);
    return na;
}

std::vector<std::pair<VertexId, int>> sample_targets(const Ball& ball, const TailSampling& sampling) {
    std::vector<std::pair<VertexId, int>> out;
    for (int c : sampling.c_list) {
        if (c < 1) throw InvalidInput("c must be at least 1");
        if (c > ball.radius())
            throw IncompleteBall("c = " + std::to_string(c) + " exceeds the ball radius " +
                                 std::to_string(ball.radius()));
        std::vector<VertexId> picked{0};
        for (int k = 1; k <= c; ++k) {
            const VertexId first = ball.sphere_begin(k);
            const std::uint64_t size = ball.sphere_end(k) - first;
            if (size == 0) continue;
            for (std::size_t j = 0; j < sampling.per_sphere; ++j) {
                Rng rng(sampling.seed, (static_cast<std::uint64_t>(c) << 40) | (static_cast<std::uint64_t>(k) << 20) | j);
                picked.push_back(first + static_cast<VertexId>(rng.below(size)));
            }
        }
        std::sort(picked.begin(), picked.end());
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        for (VertexId v : picked) out.emplace_back(v, c);
    }
    return out;
}

CriterionReport estimate_condition_A(const WalkContext& ctx, double A, const TailSampling& sampling,
                                     std::optional<double> a) {
    if (!(A > 0.0)) throw InvalidInput("A must be positive");
    auto report = tail_report(ctx, "ConditionA", A, a.value_or(1.0), sampling);
    report.parameters = {{"A", A}};
    if (a) report.parameters.emplace_back("a", *a);
    settle(report);
    if (!a && report.statistic >= 1.0) report.verdict = Verdict::Inconclusive;
    return report;
}

CriterionReport estimate_condition_B(const WalkContext& ctx, double A, double a, double B, double b,
                                     const TailSampling& sampling) {
    if (!(b < 1.0 - a)) throw InvalidInput("Condition B needs b < 1 - a");
    if (!(B > 0.0)) throw InvalidInput("B must be positive");
    const double bound = b / (2.0 * (A * B + B + 2.0));
    auto report = tail_report(ctx, "ConditionB", B, bound, sampling);
    report.parameters = {{"A", A}, {"a", a}, {"B", B}, {"b", b}, {"bound", bound}};
    settle(report);
    return report;
}

TailParameters tail_parameters(const NAConstants& na, double b_fraction) {
    if (!(b_fraction > 0.0 && b_fraction < 1.0)) throw InvalidInput("b_fraction must lie in (0, 1)");
    TailParameters p;
    p.A = na.D + na.N + 1.0;
    p.a = na.rho;
    p.b = b_fraction * (1.0 - p.a);
    const double delta = p.b / (2.0 * (p.A + 2.0));
    // B rho^{B-D-N} decreases for B > -1/ln rho.
    const double start = std::max({na.D, 2.0, -1.0 / std::log(na.rho)});
    for (double B = std::floor(start * 16.0 + 1.0) / 16.0; B < 1e6; B += 1.0 / 16.0) {
        if (B * std::pow(na.rho, B - na.D - na.N) < delta) {
            p.B = B;
            return p;
        }
    }
    throw Error("no B below 1e6 satisfies the decay condition");
}

CriterionReport na_check(const WalkContext& ctx, const NAConstants& na, const std::vector<VertexId>& targets,
                         const std::vector<int>& m_list) {
    require_transient(ctx.ball->oracle().spec());
    const auto table = table_from_center(ctx, targets);
    CriterionReport report;
    report.criterion = "NA";
    report.parameters = {{"rho", na.rho}, {"lambda", na.lambda}, {"D", na.D}, {"N", na.N}, {"green", na.green}};
    report.statistic = std::numeric_limits<double>::infinity();
    for (VertexId g : targets) {
        const int d = ctx.ball->depth(g);
        for (int m : m_list) {
            if (m < d) continue;
            const auto tail = path_length_tail(*ctx.ball, table, g, ctx.tail, m);
            InstanceRecord inst;
            inst.label = "g=" + ctx.ball->format(g) + " m=" + std::to_string(m);
            inst.size = d;
            inst.threshold = m;
            inst.lower = tail.lower;
            inst.upper = tail.upper;
            inst.point = tail.point;
            inst.bound = na.bound(m, d);
            inst.violation = tail.lower > inst.bound;
            inst.certified = inst.violation || tail.upper <= inst.bound;
            report.statistic = std::min(report.statistic, inst.bound - tail.upper);
            report.instances.push_back(std::move(inst));
        }
    }
    settle(report);
    return report;
}

CriterionReport bypass_decay_check(const WalkContext& ctx, const std::vector<int>& r_list, double epsilon,
                               std::size_t samples, std::uint64_t seed) {
    require_transient(ctx.ball->oracle().spec());
    const double lambda = ctx.mu.min_weight();
    if (!(epsilon > 0.0) || epsilon >= lambda)
        throw InvalidInput("epsilon must lie in (0, min mu) = (0, " + std::to_string(lambda) + ")");
    const Ball& ball = *ctx.ball;
    CriterionReport report;
    report.criterion = "BypassDecay";
    report.parameters = {{"epsilon", epsilon}};
    for (int r : r_list) {
        if (r < 0) throw InvalidInput("r must be non-negative");
        const double bound = std::pow(epsilon, 10.0 * r);
        if (r == 0) {
            InstanceRecord inst;
            inst.label = "r=0";
            inst.lower = inst.upper = inst.point = 1.0;
            inst.bound = bound;
            inst.certified = true;
            report.instances.push_back(inst);
            continue;
        }
        if (2 * r > ball.radius())
            throw IncompleteBall("2r = " + std::to_string(2 * r) + " exceeds the ball radius");
        const VertexId first = ball.sphere_begin(2 * r);
        const std::uint64_t size = ball.sphere_end(2 * r) - first;
        for (std::size_t i = 0; i < samples && size > 0; ++i) {
            Rng rng(seed, (static_cast<std::uint64_t>(r) << 32) | i);
            const VertexId z = first + static_cast<VertexId>(rng.below(size));
            const VertexId y = GeodesicDag(ball, 0, z).sample(rng).vertices.at(r);
            const auto h = bypass_probability(ctx, 0, z, r, y);
            InstanceRecord inst;
            inst.label = "r=" + std::to_string(r) + " z=" + ball.format(z) + " y=" + ball.format(y);
            inst.size = r;
            inst.lower = h.lower;
            inst.upper = h.upper;
            inst.point = h.point;
            inst.bound = bound;
            inst.violation = h.point > bound;
            inst.certified = h.lower > bound || h.upper <= bound;
            report.statistic = std::max(report.statistic, h.point);
            report.instances.push_back(std::move(inst));
        }
    }
    settle(report);
    return report;
}

TaToWa ta_to_wa(double epsilon, int r, double harnack_L, std::size_t ball_size) {
    TaToWa t;
    t.raw = 1.0 - (1.0 - epsilon) * std::pow(harnack_L, 2.0 * r) * static_cast<double>(ball_size);
    t.value = std::clamp(t.raw, 0.0, 1.0);
    t.out_of_range = t.raw < 0.0 || t.raw > 1.0;
    return t;
}

HarnackEstimate estimate_harnack(const WalkContext& ctx, int max_depth) {
    require_transient(ctx.ball->oracle().spec());
    const Ball& ball = *ctx.ball;
    if (max_depth < 0 || max_depth + 1 > ball.radius())
        throw IncompleteBall("Harnack estimate needs max_depth + 1 <= ball radius");
    const auto green = table_from_center(ctx, {}, true).green_sums;
    HarnackEstimate h;
    for (VertexId y = 0; y < ball.sphere_end(max_depth); ++y) {
        for (std::size_t s = 0; s < ball.degree(); ++s) {
            const VertexId ys = ball.neighbor(y, s);
            if (ys == kOutside || green[ys] <= 0.0) continue;
            ++h.pairs;
            const double ratio = green[y] / green[ys];
            if (ratio > h.L) {
                h.L = ratio;
                h.pair = ball.format(y) + "," + ball.format(ys);
            }
        }
    }
    return h;
}

namespace {

CriterionReport pi_report(const Group& group, const ReportConfig& config) {
    PiScanOptions opt;
    opt.r_list = config.pi_r;
    opt.samples = config.pi_samples;
    opt.seed = config.seed;
    CriterionReport report;
    report.criterion = "PiCriterion";
    report.parameters = {{"threshold", 10.0}, {"samples", static_cast<double>(config.pi_samples)}};
    report.statistic = kInfinity;
    for (const auto& row : pi_scan(group, opt)) {
        for (std::size_t i = 0; i < row.intervals.size(); ++i) {
            const auto& rec = row.intervals[i];
            InstanceRecord inst;
            inst.label = "r=" + std::to_string(row.r) + " " + row.labels[i] + " " + rec.status();
            inst.size = row.r;
            inst.lower = rec.pi;
            inst.upper = rec.pi_upper;
            inst.point = rec.bypass ? rec.pi_upper : kInfinity;
            inst.bound = 10.0;
            inst.violation = rec.pi_upper <= 10.0;
            inst.certified = rec.exact || rec.pi > 10.0;
            report.statistic = std::min(report.statistic, inst.point);
            report.instances.push_back(std::move(inst));
        }
    }
    settle(report);
    return report;
}

std::string word_of(const GeneratorSet& gens, const std::vector<GenIndex>& letters) {
    return letters.empty() ? std::string("e") : gens.format_word(letters);
}

CriterionReport bigon_report(const Group& group, const ReportConfig& config) {
    BigonScanOptions opt;
    opt.L_max = config.bigon_L;
    opt.seed = config.seed;
    const auto scan = bigon_scan(group, opt);
    CriterionReport report;
    report.criterion = "BigonBound";
    report.parameters = {{"L_max", static_cast<double>(config.bigon_L)}};
    int low = 0;
    int high = 0;
    for (int L = 1; L <= config.bigon_L; ++L) {
        InstanceRecord inst;
        inst.label = "L=" + std::to_string(L) + " bigons=" + std::to_string(scan.count[L]);
        inst.size = L;
        inst.lower = inst.upper = inst.point = scan.max_width[L];
        inst.certified = true;
        (2 * L <= config.bigon_L ? low : high) = std::max(2 * L <= config.bigon_L ? low : high, scan.max_width[L]);
        report.instances.push_back(std::move(inst));
    }
    report.statistic = std::max(low, high);
    const bool growing = high > low + 2;
    report.verdict = growing ? Verdict::Violation : Verdict::ConsistentWithHyperbolic;
    if (growing) {
        const auto widest = std::max_element(scan.bigons.begin(), scan.bigons.end(),
                                             [](const auto& x, const auto& y) { return x.max_width < y.max_width; });
        report.witness = "sides " + word_of(group.generators, widest->side0) + " / " +
                         word_of(group.generators, widest->side1) + " width " + std::to_string(widest->max_width);
        for (auto& inst : report.instances)
            if (2 * inst.size > config.bigon_L && inst.point > low + 2) inst.violation = true;
    }
    report.caveat = std::string(kFiniteCaveat) + "; growth compares the widest bigon of the upper and lower halves of the length range";
    if (scan.partial) report.caveat += "; scan partial: " + scan.partial_reason;
    if (std::any_of(scan.bigons.begin(), scan.bigons.end(), [](const auto& b) { return !b.half_width_holds; }))
        report.caveat += "; half-width bound failed on some bigon";
    return report;
}

CriterionReport skipped(const std::string& name, const std::string& why) {
    CriterionReport r;
    r.criterion = name;
    r.verdict = Verdict::Inconclusive;
    r.caveat = why;
    return r;
}

} // namespace

HyperbolicityReport hyperbolicity_report(const Group& group, const Measure& mu, const ReportConfig& config) {
    HyperbolicityReport out;
    out.criteria.push_back(pi_report(group, config));
    out.criteria.push_back(bigon_report(group, config));

    const auto rank = virtual_abelian_rank(group.oracle.spec());
    if (rank && *rank <= 2) {
        const std::string why = "recurrent group: Green-function criteria are undefined";
        for (const char* name : {"BypassDecay", "ConditionA", "ConditionB", "NA"}) out.criteria.push_back(skipped(name, why));
    } else {
        const Ball ball = Ball::build(group, group.oracle.identity(), config.green_radius);
        WalkContext ctx;
        ctx.ball = &ball;
        ctx.mu = mu;
        ctx.settings = config.settings;
        ctx.tail = make_tail_policy(ball, mu, config.rho_plus, config.spectral_n_max, config.settings.threads);

        const double epsilon = std::min(config.epsilon, 0.5 * mu.min_weight());
        out.criteria.push_back(bypass_decay_check(ctx, config.decay_r, epsilon, config.decay_samples, config.seed));

        std::optional<NAConstants> na;
        if (ctx.tail.bounded()) {
            const auto g = green(ball, mu, 0, 0, ctx.tail, ctx.settings);
            na = na_constants(ctx.tail.rho_plus, mu.min_weight(), g.lower);
        }
        double A = 2.0, a = 0.5, B = 4.0, b = 0.25;
        if (na && !config.A) {
            const auto cp = tail_parameters(*na);
            A = cp.A;
            a = cp.a;
            B = cp.B;
            b = cp.b;
        }
        A = config.A.value_or(A);
        a = config.a.value_or(a);
        B = config.B.value_or(B);
        b = config.b.value_or(b);
        out.criteria.push_back(estimate_condition_A(ctx, A, config.tails, a));
        out.criteria.push_back(estimate_condition_B(ctx, A, a, B, b, config.tails));
        if (na) {
            std::vector<VertexId> targets;
            for (const auto& t : sample_targets(ball, config.tails)) targets.push_back(t.first);
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
            out.criteria.push_back(na_check(ctx, *na, targets, {10, 20, 40}));
        } else {
            out.criteria.push_back(skipped("NA", "rho_plus >= 1: the NA inequality is unavailable"));
        }
        if (ctx.tail.provenance == "heuristic")
            for (auto& c : out.criteria)
                if (c.criterion != "PiCriterion" && c.criterion != "BigonBound")
                    c.caveat += "; rho_plus is a heuristic estimate";
    }

    bool all_consistent = true;
    for (const auto& c : out.criteria) {
        if (c.verdict == Verdict::Violation) out.overall = Verdict::Violation;
        all_consistent = all_consistent && c.verdict == Verdict::ConsistentWithHyperbolic;
    }
    if (out.overall != Verdict::Violation && all_consistent) out.overall = Verdict::ConsistentWithHyperbolic;
    out.caveat = kFiniteCaveat;
    return out;
}

} // namespace hyperwalk
