#include "hyperwalk/ancona.hpp"

#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0); }

// [lo, hi] of num/den for positive intervals, tolerating infinite ends.
std::pair<double, double> quotient(double num_lo, double num_hi, double den_lo, double den_hi) {
    const double lo = std::isinf(den_hi) ? 0.0 : num_lo / den_hi;
    const double hi = (den_lo <= 0.0 || std::isinf(num_hi)) ? kInf : num_hi / den_lo;
    return {lo, hi};
}

HitReport certain(std::string kind, std::string method, int r = 0) {
    HitReport h;
    h.kind = std::move(kind);
    h.method = std::move(method);
    h.lower = h.upper = h.point = 1.0;
    h.r = r;
    return h;
}

ConvolutionTable table_from(const WalkContext& ctx, VertexId source, std::vector<VertexId> watch,
                            std::span<const VertexId> forbidden = {}) {
    ConvolveOptions opt;
    opt.n_max = ctx.settings.n_max;
    opt.watch = std::move(watch);
    opt.threads = ctx.settings.threads;
    if (!forbidden.empty()) {
        opt.forbidden.assign(ctx.ball->size(), 0);
        for (VertexId v : forbidden) opt.forbidden.at(v) = 1;
    }
    return convolve(*ctx.ball, ctx.mu, source, opt);
}

// 1 - K/G with K the killed Green function.
HitReport complement_ratio(const GreenEstimate& killed, const GreenEstimate& full, std::string kind, int r) {
    HitReport h;
    h.kind = std::move(kind);
    h.method = "killed-green";
    h.r = r;
    const auto [lo, hi] = quotient(killed.lower, killed.upper, full.lower, full.upper);
    h.lower = clamp01(1.0 - hi);
    h.upper = clamp01(1.0 - lo);
    h.point = clamp01(1.0 - killed.lower / full.lower);
    return h;
}

} // namespace

double PathWord::weight(const Measure& mu) const {
    double w = 1.0;
    for (GenIndex s : letters) w *= mu.weight(s);
    return w;
}

Rational PathWord::exact_weight(const Measure& mu) const {
    Rational w = 1;
    for (GenIndex s : letters) w *= mu.exact(s);
    return w;
}

GroupElement PathWord::end(const Group& group) const {
    return group.oracle.multiply(start, group.generators.evaluate(group.oracle, letters));
}

std::vector<GroupElement> PathWord::trace(const Group& group) const {
    std::vector<GroupElement> out{start};
    for (GenIndex s : letters) out.push_back(group.oracle.multiply(out.back(), group.generators.element(s)));
    return out;
}

PathEnumerator::PathEnumerator(Group group, Measure mu, double budget)
    : group_(std::move(group)), mu_(std::move(mu)), scaled_(ScaledWeights::from(mu_.exact_weights())),
      budget_(budget) {
    if (mu_.size() != group_.generators.size()) throw InvalidInput("measure does not match the generating set");
}

void PathEnumerator::check_budget(int L_max) const {
    if (L_max < 0) throw InvalidInput("L_max must be non-negative");
    const double words = std::pow(static_cast<double>(group_.generators.size()), L_max);
    if (words > budget_)
        throw BudgetExceeded("enumeration of " + std::to_string(group_.generators.size()) + "^" +
                             std::to_string(L_max) + " words exceeds the budget");
}

const Ball& PathEnumerator::ball_for(const GroupElement& g, int L_max, bool& reachable) const {
    int want = (L_max + 1) / 2;
    for (;;) {
        if (!ball_ || ball_->radius() < want) ball_ = Ball::build(group_, group_.oracle.identity(), want);
        if (const auto v = ball_->find(g)) {
            const int d = ball_->depth(*v);
            reachable = d <= L_max;
            const int need = (L_max + d + 1) / 2;
            if (!reachable || need <= ball_->radius()) return *ball_;
            want = need;
        } else {
            if (ball_->radius() >= L_max) {
                reachable = false;
                return *ball_;
            }
            want = L_max;
        }
    }
}

ExactPathSums PathEnumerator::sums(const GroupElement& x, const GroupElement& z, int L_max,
                                   std::span<const GroupElement> avoid) const {
    check_budget(L_max);
    const auto& oracle = group_.oracle;
    const GroupElement x_inv = oracle.invert(x);
    const GroupElement target = oracle.multiply(x_inv, z);

    ExactPathSums out;
    out.per_length.assign(static_cast<std::size_t>(L_max) + 1, Rational(0));
    bool reachable = false;
    const Ball& ball = ball_for(target, L_max, reachable);
    if (!reachable) return out;

    const VertexId t = ball.require(target);
    const auto dist_t = ball.distances_from(t);
    std::vector<std::uint8_t> masked(ball.size(), 0);
    for (const auto& a : avoid)
        if (const auto v = ball.find(oracle.multiply(x_inv, a))) masked[*v] = 1;
    if (masked[0] || dist_t[0] < 0 || dist_t[0] > L_max) return out;

    const std::size_t degree = ball.degree();
    std::vector<BigInt> cur(ball.size());
    std::vector<BigInt> nxt(ball.size());
    std::vector<VertexId> active{0};
    std::vector<VertexId> next_active;
    std::vector<std::uint8_t> in_next(ball.size(), 0);
    cur[0] = 1;
    BigInt q_pow = 1;
    for (int n = 0; n <= L_max; ++n) {
        if (cur[t] != 0) out.per_length[n] = Rational(cur[t], q_pow);
        if (n == L_max) break;
        const int remaining = L_max - n - 1;
        next_active.clear();
        for (VertexId v : active) {
            const BigInt& c = cur[v];
            for (std::size_t s = 0; s < degree; ++s) {
                const VertexId u = ball.neighbor(v, s);
                if (u == kOutside || masked[u] || dist_t[u] < 0 || dist_t[u] > remaining) continue;
                if (!in_next[u]) {
                    in_next[u] = 1;
                    next_active.push_back(u);
                }
                nxt[u] += c * scaled_.numerators[s];
            }
        }
        for (VertexId v : active) cur[v] = 0;
        for (VertexId u : next_active) in_next[u] = 0;
        cur.swap(nxt);
        active.swap(next_active);
        q_pow *= scaled_.denominator;
    }
    out.total = 0;
    for (const auto& r : out.per_length) out.total += r;
    return out;
}

void PathEnumerator::for_each_word(const GroupElement& g, int L_max,
                                   const std::function<void(std::span<const GenIndex>)>& visit) const {
    check_budget(L_max);
    bool reachable = false;
    const Ball& ball = ball_for(g, L_max, reachable);
    if (!reachable) return;
    const VertexId t = ball.require(g);
    const auto dist_t = ball.distances_from(t);
    if (dist_t[0] < 0 || dist_t[0] > L_max) return;

    std::vector<GenIndex> word;
    double nodes = 0;
    const auto recurse = [&](auto&& self, VertexId v) -> void {
        if (++nodes > budget_) throw BudgetExceeded("word enumeration exceeded its node budget");
        if (v == t) visit(word);
        const int remaining = L_max - static_cast<int>(word.size()) - 1;
        if (remaining < 0) return;
        for (std::size_t s = 0; s < ball.degree(); ++s) {
            const VertexId u = ball.neighbor(v, s);
            if (u == kOutside || dist_t[u] < 0 || dist_t[u] > remaining) continue;
            word.push_back(static_cast<GenIndex>(s));
            self(self, u);
            word.pop_back();
        }
    };
    recurse(recurse, 0);
}

ExactPathSums enumerate_paths(const Group& group, const Measure& mu, const GroupElement& x,
                              const GroupElement& z, int L_max, double budget) {
    return PathEnumerator(group, mu, budget).sums(x, z, L_max);
}

std::vector<VertexId> ball_around(const Ball& ball, VertexId y, int r, bool open) {
    const int reach = open ? r - 1 : r;
    if (reach < 0) return {};
    if (ball.depth(y) + reach > ball.radius())
        throw IncompleteBall("ball of radius " + std::to_string(reach) + " around " + ball.format(y) +
                             " does not fit in the working ball");
    const auto dist = ball.distances_from(y, reach);
    std::vector<VertexId> out;
    for (VertexId v = 0; v < ball.size(); ++v)
        if (dist[v] >= 0 && dist[v] <= reach) out.push_back(v);
    return out;
}

HitReport hit_probability_point(const WalkContext& ctx, VertexId x, VertexId y, VertexId z) {
    require_transient(ctx.ball->oracle().spec());
    if (y == x || y == z) return certain("wa", "identity-formula");
    const auto tx = table_from(ctx, x, {y, z});
    const auto ty = table_from(ctx, y, {y, z});
    const auto gxy = green_from_table(*ctx.ball, tx, y, ctx.tail);
    const auto gxz = green_from_table(*ctx.ball, tx, z, ctx.tail);
    const auto gyy = green_from_table(*ctx.ball, ty, y, ctx.tail);
    const auto gyz = green_from_table(*ctx.ball, ty, z, ctx.tail);

    HitReport h;
    h.kind = "wa";
    h.method = "identity-formula";
    const auto [lo, hi] = quotient(gxy.lower * gyz.lower, gxy.upper * gyz.upper, gyy.lower * gxz.lower,
                                   gyy.upper * gxz.upper);
    h.lower = clamp01(lo);
    h.upper = clamp01(hi);
    h.point = clamp01(gxy.lower * gyz.lower / (gyy.lower * gxz.lower));
    return h;
}

HitReport hit_probability_point_killed(const WalkContext& ctx, VertexId x, VertexId y, VertexId z) {
    require_transient(ctx.ball->oracle().spec());
    if (y == x || y == z) return certain("wa", "killed-green");
    const VertexId avoid[] = {y};
    const auto full = green_from_table(*ctx.ball, table_from(ctx, x, {z}), z, ctx.tail);
    const auto killed = green_from_table(*ctx.ball, table_from(ctx, x, {z}, avoid), z, ctx.tail);
    return complement_ratio(killed, full, "wa", 0);
}

HitReport hit_probability_ball(const WalkContext& ctx, VertexId x, VertexId y, VertexId z, int r) {
    require_transient(ctx.ball->oracle().spec());
    if (r < 0) throw InvalidInput("radius must be non-negative");
    const auto target = ball_around(*ctx.ball, y, r, false);
    if (std::find(target.begin(), target.end(), x) != target.end() ||
        std::find(target.begin(), target.end(), z) != target.end())
        return certain("ta", "killed-green", r);
    const auto full = green_from_table(*ctx.ball, table_from(ctx, x, {z}), z, ctx.tail);
    const auto killed = green_from_table(*ctx.ball, table_from(ctx, x, {z}, target), z, ctx.tail);
    return complement_ratio(killed, full, "ta", r);
}

HitReport bypass_probability(const WalkContext& ctx, VertexId x, VertexId z, int r, std::optional<VertexId> y) {
    require_transient(ctx.ball->oracle().spec());
    if (r < 0) throw InvalidInput("radius must be non-negative");
    const GeodesicDag dag(*ctx.ball, x, z);
    if (dag.interval().length != 2 * r)
        throw InvalidInput("bypass needs |x-z| = 2r; got |x-z| = " + std::to_string(dag.interval().length) +
                           " for r = " + std::to_string(r));
    VertexId mid = x;
    if (y) {
        mid = *y;
        const auto dy = ctx.ball->distances_from(mid, 2 * r);
        if (dy[x] != r || dy[z] != r) throw InvalidInput("y is not a midpoint of [x,z]");
    } else {
        bool overflow = false;
        mid = dag.enumerate(1, overflow).front().vertices.at(r);
    }
    HitReport h;
    h.kind = "bypass";
    h.method = "killed-green";
    h.r = r;
    const auto avoid = ball_around(*ctx.ball, mid, r, true);
    if (avoid.empty()) {
        h.lower = h.upper = h.point = 1.0;
        return h;
    }
    const auto full = green_from_table(*ctx.ball, table_from(ctx, x, {z}), z, ctx.tail);
    const auto killed = green_from_table(*ctx.ball, table_from(ctx, x, {z}, avoid), z, ctx.tail);
    const auto [lo, hi] = quotient(killed.lower, killed.upper, full.lower, full.upper);
    h.lower = clamp01(lo);
    h.upper = clamp01(hi);
    h.point = clamp01(killed.lower / full.lower);
    return h;
}

GreenPathSampler::GreenPathSampler(const Ball& ball, const Measure& mu, VertexId z, int n_max, unsigned threads,
                                   double max_reject_rate)
    : ball_(&ball), mu_(mu), z_(z), max_reject_rate_(max_reject_rate) {
    require_transient(ball.oracle().spec());
    ConvolveOptions opt;
    opt.n_max = n_max;
    opt.accumulate = true;
    opt.threads = threads;
    h_ = convolve(ball, mu_, z, opt).green_sums;
}

std::optional<PathWord> GreenPathSampler::draw(VertexId x, Rng& rng, std::size_t max_length) const {
    PathWord path;
    path.start = ball_->element(x);
    const std::size_t degree = ball_->degree();
    std::vector<double> weight(degree);
    VertexId w = x;
    for (;;) {
        if (ball_->depth(w) >= ball_->radius()) return std::nullopt;
        const double stop = w == z_ ? 1.0 : 0.0;
        double total = stop;
        for (std::size_t s = 0; s < degree; ++s) {
            const VertexId u = ball_->neighbor(w, s);
            weight[s] = u == kOutside ? 0.0 : mu_.weight(s) * h_[u];
            total += weight[s];
        }
        double pick = rng.uniform() * total;
        if (pick < stop) return path;
        pick -= stop;
        std::size_t chosen = degree;
        for (std::size_t s = 0; s < degree; ++s) {
            if (weight[s] <= 0.0) continue;
            chosen = s;
            if (pick < weight[s]) break;
            pick -= weight[s];
        }
        if (chosen == degree) return std::nullopt;
        path.letters.push_back(static_cast<GenIndex>(chosen));
        w = ball_->neighbor(w, chosen);
        if (path.letters.size() > max_length) return std::nullopt;
    }
}

SampleBatch GreenPathSampler::sample(VertexId x, std::size_t count, std::uint64_t seed) const {
    SampleBatch batch;
    batch.seed = seed;
    batch.paths.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, i);
        for (;;) {
            if (auto p = draw(x, rng)) {
                batch.paths.push_back(std::move(*p));
                break;
            }
            ++batch.rejected;
            const double attempts = static_cast<double>(batch.paths.size() + batch.rejected);
            if (batch.rejected > 100 && static_cast<double>(batch.rejected) > max_reject_rate_ * attempts)
                throw IncompleteBall("Green path sampler rejected " + std::to_string(batch.rejected) +
                                     " walks at the ball boundary; use a larger ball");
        }
    }
    return batch;
}

PathWord sample_green_path(const GreenPathSampler& sampler, VertexId x, std::uint64_t seed) {
    return sampler.sample(x, 1, seed).paths.front();
}

ConditionalLaw conditional_law_check(const PathEnumerator& paths, const GroupElement& x,
                                     const GroupElement& z, std::span<const GenIndex> sigma,
                                     std::span<const GenIndex> theta, const PathPredicate& event,
                                     int L_max) {
    const auto& group = paths.group();
    const auto& oracle = group.oracle;
    const auto& scaled = paths.scaled();
    const GroupElement g = oracle.multiply(oracle.invert(x), z);

    std::vector<BigInt> q_pow{1};
    for (int i = 0; i < L_max; ++i) q_pow.push_back(q_pow.back() * scaled.denominator);
    const auto numerator = [&](std::span<const GenIndex> word) {
        BigInt w = 1;
        for (GenIndex s : word) w *= scaled.numerators[s];
        return w;
    };

    ConditionalLaw out;
    const std::size_t frame = sigma.size() + theta.size();
    BigInt h_mass = 0;
    BigInt a_mass = 0;
    paths.for_each_word(g, L_max, [&](std::span<const GenIndex> word) {
        if (word.size() < frame) return;
        if (!std::equal(sigma.begin(), sigma.end(), word.begin())) return;
        if (!std::equal(theta.begin(), theta.end(), word.end() - theta.size())) return;
        const BigInt w = numerator(word) * q_pow[L_max - word.size()];
        h_mass += w;
        if (event(word)) a_mass += w;
        ++out.lhs_words;
    });

    const int inner = L_max - static_cast<int>(frame);
    if (inner < 0) return out;
    const GroupElement h = oracle.multiply(
        oracle.multiply(oracle.invert(group.generators.evaluate(oracle, sigma)), g),
        oracle.invert(group.generators.evaluate(oracle, theta)));
    BigInt t_mass = 0;
    BigInt e_mass = 0;
    std::vector<GenIndex> full;
    paths.for_each_word(h, inner, [&](std::span<const GenIndex> phi) {
        const BigInt w = numerator(phi) * q_pow[inner - phi.size()];
        t_mass += w;
        full.assign(sigma.begin(), sigma.end());
        full.insert(full.end(), phi.begin(), phi.end());
        full.insert(full.end(), theta.begin(), theta.end());
        if (event(full)) e_mass += w;
        ++out.rhs_words;
    });

    out.defined = h_mass > 0 && t_mass > 0;
    if (out.defined) {
        out.lhs = Rational(a_mass, h_mass);
        out.rhs = Rational(e_mass, t_mass);
    }
    return out;
}

} // namespace hyperwalk
