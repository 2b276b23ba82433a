#include "hyperwalk/geometry.hpp"

#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace hyperwalk {

namespace {

struct BfsResult {
    std::vector<std::int32_t> dist;
    std::vector<VertexId> parent;
};

// BFS from src over vertices with allowed[v]; generator order breaks ties.
BfsResult bfs(const Ball& ball, VertexId src, const std::vector<std::uint8_t>& allowed) {
    BfsResult out;
    out.dist.assign(ball.size(), -1);
    out.parent.assign(ball.size(), kOutside);
    std::deque<VertexId> queue{src};
    out.dist[src] = 0;
    while (!queue.empty()) {
        const VertexId v = queue.front();
        queue.pop_front();
        for (VertexId u : ball.neighbors(v)) {
            if (u == kOutside || !allowed[u] || out.dist[u] >= 0) continue;
            out.dist[u] = out.dist[v] + 1;
            out.parent[u] = v;
            queue.push_back(u);
        }
    }
    return out;
}

// Greedy geodesic from x to z taking the largest generator index that stays on a geodesic.
std::vector<GenIndex> last_geodesic(const Ball& ball, const std::vector<std::int32_t>& to_z, VertexId x) {
    std::vector<GenIndex> letters;
    VertexId v = x;
    while (to_z[v] > 0) {
        for (std::size_t s = ball.degree(); s-- > 0;) {
            const VertexId u = ball.neighbor(v, s);
            if (u != kOutside && to_z[u] == to_z[v] - 1) {
                letters.push_back(static_cast<GenIndex>(s));
                v = u;
                break;
            }
        }
    }
    return letters;
}

std::vector<VertexId> trace_in(const Ball& ball, VertexId start, const std::vector<GenIndex>& letters) {
    std::vector<VertexId> out{start};
    for (GenIndex s : letters) out.push_back(ball.neighbor(out.back(), s));
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return kInfinity;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

class MetricCache {
public:
    MetricCache(const Ball& ball, const Ball& metric) : ball_(&ball), metric_(&metric) {}

    std::optional<int> operator()(VertexId u, VertexId v) {
        if (u == v) return 0;
        const std::uint64_t key = (std::uint64_t{std::min(u, v)} << 32) | std::max(u, v);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
        const auto d = metric_distance(*metric_, ball_->element(u), ball_->element(v));
        cache_.emplace(key, d);
        return d;
    }

private:
    const Ball* ball_;
    const Ball* metric_;
    std::unordered_map<std::uint64_t, std::optional<int>> cache_;
};

} // namespace

std::string IntervalRecord::status() const {
    if (!bypass) return "no-bypass-within";
    return exact ? "bypass" : "lower-bound";
}

IntervalRecord pi_of_interval(const Ball& ball, VertexId x, VertexId y, VertexId z, int working_radius) {
    const auto dy = ball.distances_from(y, working_radius);
    const int r = dy.at(x);
    if (r < 1 || dy.at(z) != r) throw InvalidInput("x and z must lie at the same positive distance from y");
    if (working_radius < 2 * r)
        throw InvalidInput("working radius " + std::to_string(working_radius) + " is below 2r = " +
                           std::to_string(2 * r));
    if (ball.depth(y) + working_radius > ball.radius())
        throw IncompleteBall("working region of radius " + std::to_string(working_radius) + " around " +
                             ball.format(y) + " does not fit in the ball");

    std::vector<std::uint8_t> allowed(ball.size(), 0);
    for (VertexId v = 0; v < ball.size(); ++v) allowed[v] = dy[v] >= 0;
    if (bfs(ball, x, allowed).dist[z] != 2 * r) throw InvalidInput("y is not the midpoint of a geodesic from x to z");

    IntervalRecord rec;
    rec.x = x;
    rec.y = y;
    rec.z = z;
    rec.r = r;
    rec.working_radius = working_radius;
    for (VertexId v = 0; v < ball.size(); ++v) allowed[v] = dy[v] >= r;
    const auto found = bfs(ball, x, allowed);
    const int bound = 2 * (working_radius + 1 - r);
    if (found.dist[z] >= 0) {
        rec.bypass = found.dist[z];
        for (VertexId v = z; v != kOutside; v = found.parent[v]) rec.path.push_back(v);
        std::reverse(rec.path.begin(), rec.path.end());
        rec.exact = *rec.bypass <= bound;
        rec.pi_upper = static_cast<double>(*rec.bypass) / r;
        rec.pi = rec.exact ? rec.pi_upper : static_cast<double>(bound) / r;
    } else {
        rec.pi = static_cast<double>(bound) / r;
    }
    return rec;
}

std::vector<PiScanRow> pi_scan(const Group& group, const PiScanOptions& options) {
    if (options.r_list.empty()) throw InvalidInput("pi scan needs at least one radius");
    std::vector<PiScanRow> rows;
    if (options.samples == 0) return rows;
    const auto& oracle = group.oracle;
    for (int r : options.r_list) {
        if (r < 1) throw InvalidInput("pi scan radii must be positive");
        const int working = 2 * r + (options.slack < 0 ? r - 1 : options.slack);
        const Ball ball = Ball::build(group, oracle.identity(), working, options.memory_cap);
        PiScanRow row;
        row.r = r;
        row.working_radius = working;
        if (options.delta) row.gromov_bound = *options.delta * (std::pow(2.0, r / *options.delta) - 2.0);
        if (2 * r > ball.radius() || ball.sphere_begin(2 * r) == ball.sphere_end(2 * r)) {
            rows.push_back(std::move(row));
            continue;
        }
        const VertexId first = ball.sphere_begin(2 * r);
        const std::uint64_t sphere = ball.sphere_end(2 * r) - first;
        std::vector<double> values;
        for (std::size_t i = 0; i < options.samples; ++i) {
            Rng rng(options.seed, (static_cast<std::uint64_t>(r) << 32) | i);
            const VertexId end = first + static_cast<VertexId>(rng.below(sphere));
            const GeodesicDag dag(ball, 0, end);
            const auto word = dag.sample(rng);
            const GroupElement mid_inv = oracle.invert(ball.element(word.vertices.at(r)));
            const GroupElement x = mid_inv;
            const GroupElement z = oracle.multiply(mid_inv, ball.element(end));
            auto rec = pi_of_interval(ball, ball.require(x), 0, ball.require(z), working);
            row.no_bypass += !rec.bypass;
            row.exact += rec.exact;
            values.push_back(rec.bypass ? rec.pi : kInfinity);
            row.labels.push_back(oracle.format(x) + "|" + oracle.format(oracle.identity()) + "|" + oracle.format(z));
            row.intervals.push_back(std::move(rec));
        }
        row.samples = values.size();
        row.min_pi = *std::min_element(values.begin(), values.end());
        row.median_pi = median_of(values);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<int> metric_distance(const Ball& metric, const GroupElement& g, const GroupElement& h) {
    const auto& oracle = metric.oracle();
    if (const auto v = metric.find(oracle.multiply(oracle.invert(g), h))) return metric.depth(*v);
    return std::nullopt;
}

BigonScan bigon_scan(const Group& group, const BigonScanOptions& options) {
    if (options.L_max < 0) throw InvalidInput("L_max must be non-negative");
    BigonScan scan;
    scan.max_width.assign(options.L_max + 1, 0);
    scan.count.assign(options.L_max + 1, 0);
    const Ball ball = Ball::build(group, group.oracle.identity(), options.L_max, options.memory_cap);
    const int metric_radius = options.metric_radius < 0 ? 2 * options.L_max : options.metric_radius;
    std::optional<Ball> metric;
    std::optional<MetricCache> dist;
    std::size_t pairs = 0;

    struct Stop {};
    const auto record = [&](std::vector<GenIndex> a, std::vector<GenIndex> b, bool half) {
        if (++pairs > options.budget) {
            scan.partial_reason = "pair budget exhausted";
            throw Stop{};
        }
        if (!metric) {
            try {
                metric.emplace(Ball::build(group, group.oracle.identity(), metric_radius, options.memory_cap));
            } catch (const BudgetExceeded& e) {
                scan.partial_reason = e.what();
                throw Stop{};
            }
            dist.emplace(ball, *metric);
        }
        BigonRecord rec;
        rec.start = group.oracle.identity();
        rec.length = static_cast<int>(a.size());
        rec.half_edge = half;
        const auto ta = trace_in(ball, 0, a);
        const auto tb = trace_in(ball, 0, b);
        const auto d = [&](VertexId u, VertexId v) {
            const auto value = (*dist)(u, v);
            if (!value) {
                scan.partial_reason = "metric ball of radius " + std::to_string(metric_radius) + " too small";
                throw Stop{};
            }
            return *value;
        };
        const int L = rec.length;
        rec.regular = true;
        for (int s = 0; s <= L; ++s) {
            rec.widths.push_back(d(ta[s], tb[s]));
            const bool interior = s > 0 && (s < L || half);
            if (interior && ta[s] == tb[s]) rec.regular = false;
        }
        rec.max_width = *std::max_element(rec.widths.begin(), rec.widths.end());
        for (int side = 0; side < 2; ++side) {
            const auto& own = side == 0 ? ta : tb;
            const auto& other = side == 0 ? tb : ta;
            for (int s = 0; s <= L; ++s) {
                int nearest = std::numeric_limits<int>::max();
                for (VertexId w : other) nearest = std::min(nearest, d(own[s], w));
                rec.hausdorff_width = std::max(rec.hausdorff_width, nearest);
                if (2 * nearest < rec.widths[s]) rec.half_width_holds = false;
            }
        }
        rec.side0 = std::move(a);
        rec.side1 = std::move(b);
        scan.max_width[L] = std::max(scan.max_width[L], rec.max_width);
        ++scan.count[L];
        scan.bigons.push_back(std::move(rec));
    };

    const auto endpoints = [&](int L) {
        std::vector<VertexId> out;
        const VertexId first = ball.sphere_begin(L);
        const std::size_t size = ball.sphere_end(L) - first;
        if (size <= options.sphere_limit) {
            for (std::size_t i = 0; i < size; ++i) out.push_back(first + static_cast<VertexId>(i));
        } else {
            for (std::size_t j = 0; j < options.endpoint_samples; ++j) {
                Rng rng(options.seed, (std::uint64_t{1} << 62) | (static_cast<std::uint64_t>(L) << 32) | j);
                out.push_back(first + static_cast<VertexId>(rng.below(size)));
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
        return out;
    };

    try {
        for (int L = 1; L <= options.L_max; ++L) {
            for (VertexId end : endpoints(L)) {
                const GeodesicDag dag(ball, 0, end);
                if (dag.count() < 2) continue;
                if (dag.count() <= options.pair_enum_limit) {
                    bool overflow = false;
                    const auto all = dag.enumerate(options.pair_enum_limit, overflow);
                    for (std::size_t i = 0; i < all.size(); ++i)
                        for (std::size_t j = i + 1; j < all.size(); ++j)
                            record(all[i].letters, all[j].letters, false);
                    continue;
                }
                bool overflow = false;
                auto first = dag.enumerate(1, overflow).front().letters;
                const auto to_end = ball.distances_from(end);
                auto last = last_geodesic(ball, to_end, 0);
                record(first, last, false);
                Rng rng(options.seed, (static_cast<std::uint64_t>(L) << 32) | end);
                for (std::size_t i = 0; i < options.random_pairs; ++i) {
                    auto a = dag.sample(rng).letters;
                    auto b = dag.sample(rng).letters;
                    if (a != b) record(std::move(a), std::move(b), false);
                }
            }
            if (!options.half_edges) continue;
            for (VertexId u : endpoints(L)) {
                for (std::size_t s = 0; s < ball.degree(); ++s) {
                    const VertexId v = ball.neighbor(u, s);
                    if (v == kOutside || v <= u || ball.depth(v) != L) continue;
                    bool overflow = false;
                    auto a = GeodesicDag(ball, 0, u).enumerate(1, overflow).front().letters;
                    auto b = GeodesicDag(ball, 0, v).enumerate(1, overflow).front().letters;
                    record(std::move(a), std::move(b), true);
                }
            }
        }
    } catch (const Stop&) {
        scan.partial = true;
    }
    return scan;
}

double ProperFunction::length() const noexcept {
    return samples.empty() ? 0.0 : spacing * static_cast<double>(samples.size() - 1);
}

double ProperFunction::operator()(double t) const {
    if (samples.empty()) return 0.0;
    const double pos = std::clamp(t / spacing, 0.0, static_cast<double>(samples.size() - 1));
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= samples.size()) return samples.back();
    const double frac = pos - static_cast<double>(i);
    return samples[i] + frac * (samples[i + 1] - samples[i]);
}

std::string ProperFunction::check(double tol) const {
    if (samples.size() < 2) return "needs at least two samples";
    if (!(spacing > 0.0)) return "spacing must be positive";
    if (std::abs(samples.front()) > tol || std::abs(samples.back()) > tol) return "f must vanish at both ends";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] < -tol) return "f is negative at sample " + std::to_string(i);
        if (i > 0 && std::abs(samples[i] - samples[i - 1]) > 2.0 * spacing + tol)
            return "f is not 2-Lipschitz at sample " + std::to_string(i);
    }
    return {};
}

HeightResult height_hk(const ProperFunction& f, double k, double grid_step) {
    if (!(k > 0.0)) throw InvalidInput("k must be positive");
    if (!(grid_step > 0.0)) throw InvalidInput("grid step must be positive");
    if (const auto why = f.check(1e-9); !why.empty()) throw InvalidInput("not a proper function: " + why);
    const double per = f.spacing / grid_step;
    if (std::abs(per - std::round(per)) > 1e-9 * std::max(1.0, per))
        throw InvalidInput("grid step must divide the sample spacing");
    const auto n = static_cast<std::size_t>(std::llround(f.length() / grid_step));
    std::vector<double> g(n + 1);
    for (std::size_t j = 0; j <= n; ++j) g[j] = f(static_cast<double>(j) * grid_step);

    const double tol = 2.0 * grid_step;
    HeightResult best;
    best.k = k;
    best.grid_step = grid_step;
    bool found = false;
    for (std::size_t p = 0; p <= n; ++p) {
        double m = g[p];
        for (std::size_t q = p; q <= n; ++q) {
            m = std::min(m, g[q]);
            if (found && m <= best.h) break;
            const double len = static_cast<double>(q - p) * grid_step;
            if (std::abs(g[p] - g[q]) > tol || g[p] > m + tol || g[q] > m + tol) continue;
            if (len / (2.0 * k) > m + tol || m > len / k + tol) continue;
            if (!found || m > best.h) {
                found = true;
                best.h = m;
                best.p = static_cast<double>(p) * grid_step;
                best.q = static_cast<double>(q) * grid_step;
            }
        }
    }
    if (!found) throw Error("height_hk found no suitable interval");
    return best;
}

ProperFunction width_function(const BigonRecord& bigon) {
    ProperFunction f;
    f.spacing = 0.5;
    const auto& w = bigon.widths;
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (s > 0) f.samples.push_back(0.5 * (w[s - 1] + w[s]));
        f.samples.push_back(w[s]);
    }
    if (bigon.half_edge) f.samples.push_back(0.0);
    return f;
}

ParadoxCertificate paradox_certificate(const BigonRecord& bigon, const ParadoxParameters& params,
                                       const Ball& metric, double grid_step) {
    if (params.n < 3) throw InvalidInput("paradox parameters need n >= 3");
    if (metric.radius() < 2 * params.r) throw InvalidInput("metric ball radius must be at least 2r");
    const auto& oracle = metric.oracle();
    const auto& gens = metric.generators();

    ParadoxCertificate c;
    const auto h = height_hk(width_function(bigon), params.k, grid_step);
    const double tol = 2.0 * grid_step;
    c.M = h.h;
    c.p = h.p;
    c.q = h.q;
    c.L = h.q - h.p;
    c.d = c.L / (params.n - 1);
    c.window_ok = c.L / (2.0 * params.k) <= c.M + tol && c.M <= c.L / params.k + tol;
    c.spacing_ok = c.M >= params.m_spacing;
    c.radius_ok = c.M >= params.m_radius;
    c.separation_ok = c.d >= 2 * params.r + 1;
    c.a_threshold_ok = c.M >= params.m_condition_a;
    c.b_threshold_ok = c.M >= params.m_condition_b;

    for (int i = 0; i < params.n; ++i) c.T.push_back(c.p + i * c.d);
    for (const auto* side : {&bigon.side0, &bigon.side1}) {
        for (double t : c.T) {
            const auto idx = static_cast<std::size_t>(
                std::clamp<long long>(std::llround(t), 0, static_cast<long long>(side->size())));
            const std::span<const GenIndex> prefix(side->data(), idx);
            c.centers.push_back(oracle.multiply(bigon.start, gens.evaluate(oracle, prefix)));
        }
    }
    c.disjoint = true;
    for (std::size_t i = 0; i < c.centers.size() && c.disjoint; ++i)
        for (std::size_t j = i + 1; j < c.centers.size(); ++j) {
            const auto dist = metric_distance(metric, c.centers[i], c.centers[j]);
            if (dist && *dist <= 2 * params.r) {
                c.disjoint = false;
                break;
            }
        }

    c.paradoxical = c.window_ok && c.spacing_ok && c.radius_ok && c.separation_ok && c.a_threshold_ok && c.b_threshold_ok && c.disjoint;
    std::ostringstream os;
    if (c.paradoxical) {
        os << "paradoxical interval [" << c.p << ", " << c.q << "] with M = " << c.M;
    } else {
        os << "no paradoxical interval; fails";
        const std::pair<bool, const char*> checks[] = {
            {c.window_ok, "height-window"},       {c.spacing_ok, "spacing"},
            {c.radius_ok, "radius"},              {c.separation_ok, "separation"},
            {c.a_threshold_ok, "condition-A-threshold"}, {c.b_threshold_ok, "condition-B-threshold"},
                                                       {c.disjoint, "disjointness"}};
        for (const auto& [ok, name] : checks)
            if (!ok) os << ' ' << name;
    }
    c.summary = os.str();
    return c;
}

} // namespace hyperwalk
