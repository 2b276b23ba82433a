#include "hyperwalk/walk.hpp"

#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

namespace hyperwalk {

namespace {

constexpr std::size_t kBlock = 8192;

std::string weight_text(const Rational& w) { return std::to_string(to_double(w)); }

} // namespace

Measure::Measure(std::vector<Rational> exact, const GeneratorSet& gens) : exact_(std::move(exact)) {
    if (exact_.size() != gens.size()) throw InvalidInput("measure size does not match the generating set");
    for (std::size_t s = 0; s < exact_.size(); ++s) {
        weights_.push_back(to_double(exact_[s]));
        inverse_.push_back(gens.inverse(s));
    }
}

Measure Measure::uniform(const GeneratorSet& gens) {
    if (gens.size() == 0) throw InvalidInput("empty generating set");
    return Measure(std::vector<Rational>(gens.size(), Rational(1, static_cast<long>(gens.size()))), gens);
}

double Measure::min_weight() const {
    if (weights_.empty()) return 0.0;
    return *std::min_element(weights_.begin(), weights_.end());
}

Measure validate_measure(const GeneratorSet& gens,
                         const std::vector<std::pair<std::string, Rational>>& weights) {
    std::map<std::size_t, Rational> given;
    for (const auto& [label, w] : weights) {
        const auto s = gens.find(label);
        if (!s) throw InvalidInput("unknown generator label '" + label + "'");
        if (given.count(*s)) throw InvalidInput("generator '" + label + "' listed twice");
        given[*s] = w;
    }
    std::vector<Rational> exact(gens.size());
    for (std::size_t s = 0; s < gens.size(); ++s) {
        const auto it = given.find(s);
        if (it == given.end() || it->second == 0)
            throw InvalidInput("generator '" + gens.label(s) + "' has zero weight");
        if (it->second < 0) throw InvalidInput("generator '" + gens.label(s) + "' has negative weight");
        exact[s] = it->second;
    }
    const Rational tol(1, 1000000000000LL);
    for (std::size_t s = 0; s < gens.size(); ++s) {
        const std::size_t t = gens.inverse(s);
        if (abs(exact[s] - exact[t]) > tol)
            throw InvalidInput("asymmetric weights: " + gens.label(s) + "=" + weight_text(exact[s]) + " but " +
                               gens.label(t) + "=" + weight_text(exact[t]));
    }
    std::vector<Rational> sym(gens.size());
    for (std::size_t s = 0; s < gens.size(); ++s) sym[s] = (exact[s] + exact[gens.inverse(s)]) / 2;
    Rational total = 0;
    for (const auto& w : sym) total += w;
    if (abs(total - 1) > tol) throw InvalidInput("weights sum to " + weight_text(total) + ", not 1");
    for (auto& w : sym) w /= total;
    return Measure(std::move(sym), gens);
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

std::span<const double> ConvolutionTable::series(VertexId v) const {
    for (std::size_t i = 0; i < watch.size(); ++i)
        if (watch[i] == v) return watched[i];
    throw InvalidInput("vertex " + std::to_string(v) + " is not watched by this table");
}

double ConvolutionTable::mass(int n, VertexId v) const {
    if (n < 0 || n > n_max) throw InvalidInput("step out of range");
    if (!steps.empty()) return steps.at(n).at(v);
    return series(v)[n];
}

ConvolutionTable convolve(const Ball& ball, const Measure& mu, VertexId x, const ConvolveOptions& options) {
    if (options.n_max < 0) throw InvalidInput("n_max must be non-negative");
    if (x >= ball.size()) throw InvalidInput("source vertex outside the ball");
    if (mu.size() != ball.degree()) throw InvalidInput("measure does not match the ball's generating set");
    if (!options.forbidden.empty() && options.forbidden.size() != ball.size())
        throw InvalidInput("forbidden mask has the wrong size");
    for (VertexId w : options.watch)
        if (w >= ball.size()) throw InvalidInput("watched vertex outside the ball");

    const std::size_t n_vertices = ball.size();
    const std::size_t degree = ball.degree();
    if (options.keep_steps &&
        n_vertices * static_cast<std::size_t>(options.n_max + 1) > (std::size_t{1} << 28))
        throw BudgetExceeded("keeping every convolution step would exceed the table budget");

    ConvolutionTable t;
    t.source = x;
    t.n_max = options.n_max;
    t.watch = options.watch;
    t.watched.assign(t.watch.size(), {});
    const auto& forbidden = options.forbidden;
    const auto is_forbidden = [&](VertexId v) { return !forbidden.empty() && forbidden[v] != 0; };

    // Probability of stepping out of the ball from each outer-sphere vertex.
    const VertexId outer_begin = ball.sphere_begin(ball.radius());
    const VertexId outer_end = ball.sphere_end(ball.radius());
    std::vector<double> out_weight(outer_end - outer_begin, 0.0);
    for (VertexId v = outer_begin; v < outer_end; ++v)
        for (std::size_t s = 0; s < degree; ++s)
            if (ball.neighbor(v, s) == kOutside) out_weight[v - outer_begin] += mu.weight(s);

    std::vector<std::size_t> inv(degree);
    for (std::size_t s = 0; s < degree; ++s) inv[s] = mu.inverse(s);
    const auto weights = mu.weights();

    std::vector<double> cur(n_vertices, 0.0);
    std::vector<double> nxt(n_vertices, 0.0);
    if (options.accumulate) t.green_sums.assign(n_vertices, 0.0);

    double killed_total = 0.0;
    double escaped_total = 0.0;
    if (is_forbidden(x))
        killed_total = 1.0;
    else
        cur[x] = 1.0;

    const auto record = [&](double in_ball) {
        t.escaped.push_back(escaped_total);
        t.killed.push_back(killed_total);
        t.in_ball.push_back(in_ball);
        for (std::size_t i = 0; i < t.watch.size(); ++i) t.watched[i].push_back(cur[t.watch[i]]);
        if (options.keep_steps) t.steps.push_back(cur);
        if (options.accumulate)
            for (std::size_t v = 0; v < n_vertices; ++v) t.green_sums[v] += cur[v];
    };
    record(cur[x]);

    const std::size_t blocks = (n_vertices + kBlock - 1) / kBlock;
    std::vector<double> part_mass(blocks);
    std::vector<double> part_killed(blocks);
    std::vector<double> part_escape(blocks);
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(blocks)));

    const auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n_vertices, lo + kBlock);
        CompensatedSum mass;
        CompensatedSum killed;
        CompensatedSum escape;
        for (std::size_t v = lo; v < hi; ++v) {
            const VertexId* row = ball.neighbors(static_cast<VertexId>(v)).data();
            double acc = 0.0;
            for (std::size_t s = 0; s < degree; ++s) {
                const VertexId u = row[inv[s]];
                if (u != kOutside) acc += weights[s] * cur[u];
            }
            if (v >= outer_begin && v < outer_end) escape.add(cur[v] * out_weight[v - outer_begin]);
            if (!forbidden.empty() && forbidden[v]) {
                killed.add(acc);
                acc = 0.0;
            }
            nxt[v] = acc;
            mass.add(acc);
        }
        part_mass[b] = mass.value();
        part_killed[b] = killed.value();
        part_escape[b] = escape.value();
    };

    for (int n = 1; n <= options.n_max; ++n) {
        if (threads == 1) {
            for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t b = w; b < blocks; b += threads) run_block(b);
                });
        }
        CompensatedSum mass;
        CompensatedSum killed;
        CompensatedSum escape;
        for (std::size_t b = 0; b < blocks; ++b) {
            mass.add(part_mass[b]);
            killed.add(part_killed[b]);
            escape.add(part_escape[b]);
        }
        killed_total += killed.value();
        escaped_total += escape.value();
        cur.swap(nxt);
        record(mass.value());
    }
    t.final_mass = std::move(cur);
    return t;
}

double TailPolicy::envelope(int n) const {
    double best = std::pow(rho_plus, n);
    const int top = std::min<int>(n, static_cast<int>(returns.size()) - 1);
    for (int k = 2; k <= top; k += 2) best = std::min(best, returns[k] * std::pow(rho_plus, n - k));
    return best;
}

double TailPolicy::tail_after(int n_max) const {
    if (!bounded()) return std::numeric_limits<double>::infinity();
    const int first = n_max + 1;
    double best = std::pow(rho_plus, first) / (1.0 - rho_plus);
    const int top = std::min<int>(first, static_cast<int>(returns.size()) - 1);
    for (int k = 2; k <= top; k += 2)
        best = std::min(best, returns[k] * std::pow(rho_plus, first - k) / (1.0 - rho_plus));
    return best;
}

namespace {

// Per-step bounds on mass_n(z) for the unrestricted walk.
struct StepBounds {
    std::span<const double> series;
    std::span<const double> escaped;
    const TailPolicy* tail;
    int horizon;
    int d_return;

    double upper(int n) const {
        const double m = series[n];
        if (n <= horizon) return m;
        return std::max(m, std::min(m + escaped[n - d_return], tail->envelope(n)));
    }
};

StepBounds step_bounds(const Ball& ball, const ConvolutionTable& table, VertexId z, const TailPolicy& tail) {
    const int d_exit = ball.radius() + 1 - ball.depth(table.source);
    const int d_return = ball.radius() + 1 - ball.depth(z);
    return {table.series(z), table.escaped, &tail, d_exit + d_return - 1, d_return};
}

} // namespace

GreenEstimate green_from_table(const Ball& ball, const ConvolutionTable& table, VertexId z,
                               const TailPolicy& tail) {
    const auto steps = step_bounds(ball, table, z, tail);

    GreenEstimate g;
    g.n_max = table.n_max;
    g.exact_horizon = steps.horizon;
    g.rho_plus = tail.rho_plus;
    g.rho_provenance = tail.provenance;
    g.escape_total = table.escaped.back();

    CompensatedSum lower;
    CompensatedSum upper;
    for (int n = 0; n <= table.n_max; ++n) {
        lower.add(steps.series[n]);
        upper.add(steps.upper(n));
    }
    g.lower = lower.value();
    const double rest = tail.tail_after(table.n_max);
    g.upper = std::isfinite(rest) ? upper.value() + rest : std::numeric_limits<double>::infinity();
    return g;
}

PathLengthTail path_length_tail(const Ball& ball, const ConvolutionTable& table, VertexId z,
                                const TailPolicy& tail, int m) {
    if (m < 0) throw InvalidInput("path length threshold must be non-negative");
    const auto steps = step_bounds(ball, table, z, tail);
    CompensatedSum head_lo;
    CompensatedSum head_up;
    CompensatedSum rest_lo;
    CompensatedSum rest_up;
    for (int n = 0; n <= table.n_max; ++n) {
        (n < m ? head_lo : rest_lo).add(steps.series[n]);
        (n < m ? head_up : rest_up).add(steps.upper(n));
    }
    // Steps beyond the table only carry the envelope.
    double beyond = 0.0;
    if (!tail.bounded()) {
        beyond = std::numeric_limits<double>::infinity();
    } else {
        CompensatedSum extra;
        for (int n = table.n_max + 1; n < m; ++n) extra.add(tail.envelope(n));
        head_up.add(extra.value());
        beyond = tail.tail_after(std::max(table.n_max, m - 1));
    }

    PathLengthTail t;
    t.m = m;
    t.head_lower = head_lo.value();
    t.head_upper = head_up.value();
    t.rest_lower = rest_lo.value();
    t.rest_upper = rest_up.value() + beyond;
    const auto ratio = [](double rest, double head) {
        if (std::isinf(rest)) return 1.0;
        return rest + head > 0.0 ? rest / (rest + head) : 0.0;
    };
    t.lower = ratio(t.rest_lower, t.head_upper);
    t.upper = ratio(t.rest_upper, t.head_lower);
    t.point = ratio(t.rest_lower, t.head_lower);
    return t;
}

namespace {

SpectralEstimate spectral_from_returns(std::span<const double> returns, int n_max) {
    SpectralEstimate e;
    e.n_max = n_max;
    for (int n = 1; n <= n_max && 2 * n < static_cast<int>(returns.size()); ++n) {
        const double p = returns[2 * n];
        const double prev = returns[2 * n - 2];
        e.root.push_back(p > 0.0 ? std::pow(p, 1.0 / (2.0 * n)) : 0.0);
        e.ratio.push_back(prev > 0.0 ? std::sqrt(p / prev) : 0.0);
    }
    for (double r : e.root) e.root_max = std::max(e.root_max, r);
    e.lower = e.root_max;
    for (double r : e.ratio) e.lower = std::max(e.lower, r);
    return e;
}

} // namespace

SpectralEstimate spectral_lower(const Ball& ball, const Measure& mu, int n_max, unsigned threads) {
    if (n_max < 0) throw InvalidInput("n_max must be non-negative");
    ConvolveOptions opt;
    opt.n_max = 2 * n_max;
    opt.watch = {0};
    opt.threads = threads;
    const auto table = convolve(ball, mu, 0, opt);
    auto e = spectral_from_returns(table.series(0), n_max);
    e.escape_total = table.escaped.back();
    return e;
}

TailPolicy make_tail_policy(const Ball& ball, const Measure& mu, std::optional<double> rho_plus,
                            int spectral_n_max, unsigned threads) {
    if (rho_plus && !(*rho_plus > 0.0)) throw InvalidInput("rho_plus must be positive");
    const int exact_steps = 2 * ball.radius() + 1;
    ConvolveOptions opt;
    opt.n_max = rho_plus ? exact_steps : std::max(exact_steps, 2 * spectral_n_max);
    opt.watch = {0};
    opt.threads = threads;
    const auto table = convolve(ball, mu, 0, opt);
    const auto series = table.series(0);

    TailPolicy tail;
    tail.returns.assign(series.begin(), series.begin() + exact_steps + 1);
    if (rho_plus) {
        tail.rho_plus = *rho_plus;
        tail.provenance = "user";
    } else {
        const auto est = spectral_from_returns(series, opt.n_max / 2);
        tail.rho_plus = std::min(1.0 - 1e-6, est.lower / 0.98);
        tail.provenance = "heuristic";
    }
    return tail;
}

void require_transient(const GroupSpec& spec) {
    if (classify_transience(spec) == Transience::Recurrent)
        throw RecurrentGroup("Green series diverges: " + spec.describe() +
                             " is virtually abelian of rank at most two");
}

GreenEstimate green(const Ball& ball, const Measure& mu, VertexId x, VertexId z, const TailPolicy& tail,
                    const GreenSettings& settings) {
    require_transient(ball.oracle().spec());
    ConvolveOptions opt;
    opt.n_max = settings.n_max;
    opt.watch = {z};
    opt.threads = settings.threads;
    return green_from_table(ball, convolve(ball, mu, x, opt), z, tail);
}

GreenEstimate green_killed(const Ball& ball, const Measure& mu, VertexId x, VertexId z,
                           std::span<const VertexId> forbidden, const TailPolicy& tail,
                           const GreenSettings& settings) {
    require_transient(ball.oracle().spec());
    ConvolveOptions opt;
    opt.n_max = settings.n_max;
    opt.watch = {z};
    opt.threads = settings.threads;
    opt.forbidden.assign(ball.size(), 0);
    for (VertexId v : forbidden) {
        if (v == x || v == z) throw InvalidInput("killed Green function with a forbidden endpoint");
        opt.forbidden.at(v) = 1;
    }
    auto g = green_from_table(ball, convolve(ball, mu, x, opt), z, tail);
    g.method = "killed+escape+rho-envelope";
    return g;
}

} // namespace hyperwalk
