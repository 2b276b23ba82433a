#include "cli.hpp"

#include "hyperwalk/ancona.hpp"
#include "hyperwalk/criteria.hpp"
#include "hyperwalk/csv.hpp"
#include "hyperwalk/errors.hpp"
#include "hyperwalk/geometry.hpp"
#include "hyperwalk/walk.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>

namespace hyperwalk::cli {

namespace fs = std::filesystem;

namespace {

enum class Kind { Int, Number, String, Array, Bool };

struct Field {
    const char* key;
    Kind kind;
    bool required = false;
};

const std::vector<Field> kWalkFields = {
    {"radius", Kind::Int}, {"n_max", Kind::Int}, {"rho_plus", Kind::Number}, {"spectral_n_max", Kind::Int}};

std::vector<Field> with_walk(std::vector<Field> extra) {
    extra.insert(extra.end(), kWalkFields.begin(), kWalkFields.end());
    return extra;
}

// Commands that build balls also accept memory_cap_mb.
const std::set<std::string> kBallCommands = {"ball", "green", "spectral", "wa", "ta", "bypass", "pi", "bigons"};

const std::map<std::string, std::vector<Field>>& schema() {
    static const std::map<std::string, std::vector<Field>> s = {
        {"ball", {{"radius", Kind::Int, true}, {"write_csv", Kind::Bool}}},
        {"green", with_walk({{"x", Kind::String}, {"z", Kind::String}})},
        {"spectral", {{"radius", Kind::Int}, {"n_max", Kind::Int}}},
        {"wa", with_walk({{"x", Kind::String}, {"y", Kind::String, true}, {"z", Kind::String, true},
                          {"method", Kind::String}})},
        {"ta", with_walk({{"x", Kind::String}, {"y", Kind::String, true}, {"z", Kind::String, true},
                          {"r", Kind::Int, true}})},
        {"bypass", with_walk({{"x", Kind::String}, {"y", Kind::String}, {"z", Kind::String, true},
                              {"r", Kind::Int, true}, {"epsilon", Kind::Number}})},
        {"pi", {{"x", Kind::String}, {"y", Kind::String}, {"z", Kind::String}, {"working_radius", Kind::Int},
                {"r_list", Kind::Array}, {"samples", Kind::Int}, {"slack", Kind::Int}, {"delta", Kind::Number}}},
        {"bigons", {{"L_max", Kind::Int, true}, {"budget", Kind::Int}, {"sphere_limit", Kind::Int},
                    {"endpoint_samples", Kind::Int}, {"pair_enum_limit", Kind::Int}, {"random_pairs", Kind::Int},
                    {"metric_radius", Kind::Int}, {"half_edges", Kind::Bool}}},
        {"height", {{"f", Kind::Array, true}, {"spacing", Kind::Number}, {"k", Kind::Number, true},
                    {"grid_step", Kind::Number, true}}},
        {"criteria", {{"A", Kind::Number, true}, {"a", Kind::Number, true}, {"B", Kind::Number, true},
                      {"b", Kind::Number, true}, {"r", Kind::Int}, {"k", Kind::Number}, {"epsilon", Kind::Number},
                      {"harnack_L", Kind::Number}, {"ball_size", Kind::Int}, {"ta_epsilon", Kind::Number}}},
        {"report", {{"green_radius", Kind::Int}, {"rho_plus", Kind::Number}, {"spectral_n_max", Kind::Int},
                    {"n_max", Kind::Int}, {"pi_r", Kind::Array}, {"pi_samples", Kind::Int}, {"bigon_L", Kind::Int},
                    {"decay_r", Kind::Array}, {"epsilon", Kind::Number}, {"decay_samples", Kind::Int},
                    {"A", Kind::Number}, {"a", Kind::Number}, {"B", Kind::Number}, {"b", Kind::Number},
                    {"c_list", Kind::Array}, {"per_sphere", Kind::Int}}},
    };
    return s;
}

std::vector<Field> fields_of(const std::string& command) {
    auto fields = schema().at(command);
    if (kBallCommands.count(command)) fields.push_back({"memory_cap_mb", Kind::Int});
    return fields;
}

const std::set<std::string> kTransientCommands = {"green", "wa", "ta", "bypass"};

bool matches(const json& v, Kind kind) {
    switch (kind) {
    case Kind::Int:
        return v.is_number_integer();
    case Kind::Number:
        return v.is_number();
    case Kind::String:
        return v.is_string();
    case Kind::Array:
        return v.is_array();
    case Kind::Bool:
        return v.is_boolean();
    }
    return false;
}

const char* kind_name(Kind kind) {
    switch (kind) {
    case Kind::Int:
        return "an integer";
    case Kind::Number:
        return "a number";
    case Kind::String:
        return "a string";
    case Kind::Array:
        return "an array";
    case Kind::Bool:
        return "a boolean";
    }
    return "a value";
}

bool is_sampled(const RunConfig& c) {
    return c.command == "bigons" || c.command == "report" || (c.command == "pi" && !c.params.contains("x"));
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.1f", v);
        return buf;
    }
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Non-finite values become strings; JSON has no literal for them.
json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

Measure parse_measure(const json& m, const Group& group) {
    if (m.is_string() && m.get<std::string>() == "uniform") return Measure::uniform(group.generators);
    if (!m.is_object()) throw InvalidInput("measure must be \"uniform\" or an object of generator weights");
    std::vector<std::pair<std::string, Rational>> weights;
    for (const auto& [label, w] : m.items()) {
        if (w.is_string())
            weights.emplace_back(label, parse_rational(w.get<std::string>()));
        else if (w.is_number())
            weights.emplace_back(label, parse_rational(w.dump()));
        else
            throw InvalidInput("weight of '" + label + "' must be a number or a rational string");
    }
    return validate_measure(group.generators, weights);
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Context {
public:
    Context(const RunConfig& cfg, const fs::path& out, std::vector<fs::path>& files)
        : cfg(cfg), group(make_group(cfg.group)), mu(parse_measure(cfg.measure, group)), out_(out), files_(files) {}

    const RunConfig& cfg;
    Group group;
    Measure mu;

    const json& params() const { return cfg.params; }
    bool has(const char* key) const { return cfg.params.contains(key); }
    int integer(const char* key, int fallback) const {
        return has(key) ? cfg.params.at(key).get<int>() : fallback;
    }
    double number(const char* key, double fallback) const {
        return has(key) ? cfg.params.at(key).get<double>() : fallback;
    }
    std::optional<double> maybe_number(const char* key) const {
        if (!has(key)) return std::nullopt;
        return cfg.params.at(key).get<double>();
    }
    std::string text(const char* key, const std::string& fallback) const {
        return has(key) ? cfg.params.at(key).get<std::string>() : fallback;
    }
    std::vector<int> int_list(const char* key, std::vector<int> fallback) const {
        if (!has(key)) return fallback;
        std::vector<int> out;
        for (const auto& v : cfg.params.at(key)) {
            if (!v.is_number_integer()) throw InvalidInput(std::string(key) + " must hold integers");
            out.push_back(v.get<int>());
        }
        return out;
    }
    std::uint64_t seed() const { return cfg.seed.value_or(0); }
    std::size_t memory_cap() const {
        if (!has("memory_cap_mb")) return kDefaultMemoryCap;
        const int mb = integer("memory_cap_mb", 0);
        if (mb <= 0) throw InvalidInput("memory_cap_mb must be positive");
        return static_cast<std::size_t>(mb) << 20;
    }
    Ball ball(int radius) const { return Ball::build(group, group.oracle.identity(), radius, memory_cap()); }

    GroupElement word(const std::string& w) const {
        return group.generators.evaluate(group.oracle, group.generators.parse_word(w));
    }
    VertexId vertex(const Ball& ball, const std::string& w) const {
        if (const auto v = ball.find(word(w))) return *v;
        throw IncompleteBall("word '" + w + "' lies outside the ball of radius " + std::to_string(ball.radius()));
    }

    // Rows are already formatted fields; lines end in CRLF.
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        std::ofstream os(out_ / name, std::ios::binary);
        const auto line = [&](const std::vector<std::string>& fields) {
            for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
            os << "\r\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        files_.push_back(out_ / name);
    }

    std::ofstream open(const std::string& name) {
        files_.push_back(out_ / name);
        return std::ofstream(out_ / name, std::ios::binary);
    }

private:
    fs::path out_;
    std::vector<fs::path>& files_;
};

struct WalkSetup {
    std::unique_ptr<Ball> ball;
    WalkContext ctx;
};

WalkSetup walk_setup(const Context& c) {
    WalkSetup w;
    const int radius = c.integer("radius", 10);
    if (radius < 0) throw InvalidInput("radius must be non-negative");
    w.ball = std::make_unique<Ball>(c.ball(radius));
    w.ctx.ball = w.ball.get();
    w.ctx.mu = c.mu;
    w.ctx.settings.n_max = c.integer("n_max", 200);
    w.ctx.settings.threads = c.cfg.threads;
    w.ctx.tail = make_tail_policy(*w.ball, c.mu, c.maybe_number("rho_plus"), c.integer("spectral_n_max", 60),
                                  c.cfg.threads);
    return w;
}

json green_json(const GreenEstimate& g) {
    return {{"lower", num(g.lower)},
            {"upper", num(g.upper)},
            {"point", num(g.lower)},
            {"width", num(g.width())},
            {"n_max", g.n_max},
            {"exact_horizon", g.exact_horizon},
            {"rho_plus", num(g.rho_plus)},
            {"rho_provenance", g.rho_provenance},
            {"escape_total", num(g.escape_total)},
            {"method", g.method}};
}

json hit_json(const HitReport& h) {
    return {{"kind", h.kind},          {"method", h.method}, {"lower", num(h.lower)}, {"upper", num(h.upper)},
            {"point", num(h.point)},   {"r", h.r},           {"width", num(h.upper - h.lower)}};
}

json ball_info(const Ball& ball) { return {{"radius", ball.radius()}, {"size", ball.size()}}; }

json cmd_ball(Context& c) {
    const int radius = c.integer("radius", 0);
    if (radius < 0) throw InvalidInput("radius must be non-negative");
    const Ball ball = c.ball(radius);
    if (c.has("write_csv") ? c.params().at("write_csv").get<bool>() : true) {
        auto v = c.open("vertices.csv");
        ball.write_vertices_csv(v);
        auto e = c.open("edges.csv");
        ball.write_edges_csv(e);
    }
    return {{"radius", ball.radius()},
            {"size", ball.size()},
            {"degree", ball.degree()},
            {"generators", ball.generators().labels()},
            {"sphere_sizes", ball.sphere_sizes()},
            {"memory_bytes", ball.memory_bytes()}};
}

json cmd_green(Context& c) {
    const auto w = walk_setup(c);
    const auto x = c.text("x", "e");
    const auto z = c.text("z", "e");
    const auto g = green(*w.ball, c.mu, c.vertex(*w.ball, x), c.vertex(*w.ball, z), w.ctx.tail, w.ctx.settings);
    auto out = green_json(g);
    out["x"] = x;
    out["z"] = z;
    out["ball"] = ball_info(*w.ball);
    return out;
}

json cmd_spectral(Context& c) {
    const int radius = c.integer("radius", 10);
    const int n_max = c.integer("n_max", 50);
    if (radius < 0 || n_max < 0) throw InvalidInput("radius and n_max must be non-negative");
    const Ball ball = c.ball(radius);
    const auto e = spectral_lower(ball, c.mu, n_max, c.cfg.threads);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < e.root.size(); ++i)
        rows.push_back({std::to_string(i + 1), fmt(e.root[i]), fmt(e.ratio[i])});
    c.write_csv("spectral.csv", {"n", "root", "ratio"}, rows);
    return {{"lower", num(e.lower)},
            {"root_max", num(e.root_max)},
            {"n_max", e.n_max},
            {"escape_total", num(e.escape_total)},
            {"ball", ball_info(ball)}};
}

json cmd_wa(Context& c) {
    const auto w = walk_setup(c);
    const auto x = c.vertex(*w.ball, c.text("x", "e"));
    const auto y = c.vertex(*w.ball, c.text("y", "e"));
    const auto z = c.vertex(*w.ball, c.text("z", "e"));
    const auto method = c.text("method", "identity");
    json out = {{"ball", ball_info(*w.ball)}};
    if (method == "identity" || method == "both") out["identity"] = hit_json(hit_probability_point(w.ctx, x, y, z));
    if (method == "killed" || method == "both") out["killed"] = hit_json(hit_probability_point_killed(w.ctx, x, y, z));
    if (!out.contains("identity") && !out.contains("killed"))
        throw InvalidInput("method must be identity, killed or both");
    return out;
}

json cmd_ta(Context& c) {
    const auto w = walk_setup(c);
    const auto h = hit_probability_ball(w.ctx, c.vertex(*w.ball, c.text("x", "e")), c.vertex(*w.ball, c.text("y", "e")),
                                        c.vertex(*w.ball, c.text("z", "e")), c.integer("r", 0));
    auto out = hit_json(h);
    out["ball"] = ball_info(*w.ball);
    return out;
}

json cmd_bypass(Context& c) {
    const auto w = walk_setup(c);
    std::optional<VertexId> y;
    if (c.has("y")) y = c.vertex(*w.ball, c.text("y", "e"));
    const int r = c.integer("r", 0);
    const auto h = bypass_probability(w.ctx, c.vertex(*w.ball, c.text("x", "e")), c.vertex(*w.ball, c.text("z", "e")), r, y);
    auto out = hit_json(h);
    out["ball"] = ball_info(*w.ball);
    if (const auto eps = c.maybe_number("epsilon")) {
        const double bound = std::pow(*eps, 10.0 * r);
        out["bound"] = num(bound);
        out["below_bound"] = h.point <= bound;
        out["certified"] = h.upper <= bound || h.lower > bound;
    }
    return out;
}

json interval_json(const Ball& ball, const IntervalRecord& rec) {
    return {{"x", ball.format(rec.x)},
            {"y", ball.format(rec.y)},
            {"z", ball.format(rec.z)},
            {"r", rec.r},
            {"working_radius", rec.working_radius},
            {"status", rec.status()},
            {"bypass", rec.bypass ? json(*rec.bypass) : json(nullptr)},
            {"pi", num(rec.bypass ? rec.pi : kInfinity)},
            {"pi_lower", num(rec.pi)},
            {"pi_upper", num(rec.pi_upper)}};
}

std::vector<std::string> interval_row(int r, const IntervalRecord& rec, const std::string& x, const std::string& y,
                                      const std::string& z) {
    return {std::to_string(r), fmt(rec.bypass ? rec.pi : kInfinity), rec.bypass ? std::to_string(*rec.bypass) : "",
            rec.status(), x, y, z};
}

json cmd_pi(Context& c) {
    const std::vector<std::string> header{"r", "pi", "bypass_len", "status", "x", "y", "z"};
    if (c.has("x")) {
        const auto& oracle = c.group.oracle;
        const auto yi = oracle.invert(c.word(c.text("y", "e")));
        const auto x = oracle.multiply(yi, c.word(c.text("x", "e")));
        const auto z = oracle.multiply(yi, c.word(c.text("z", "e")));
        if (!c.has("working_radius")) throw InvalidInput("explicit intervals need working_radius");
        const int working = c.integer("working_radius", 0);
        if (working < 0) throw InvalidInput("working_radius must be non-negative");
        const Ball ball = c.ball(working);
        const auto find = [&](const GroupElement& g, const char* name) {
            if (const auto v = ball.find(g)) return *v;
            throw InvalidInput(std::string(name) + " lies outside the working region");
        };
        const auto rec = pi_of_interval(ball, find(x, "x"), 0, find(z, "z"), working);
        c.write_csv("pi.csv", header,
                    {interval_row(rec.r, rec, c.text("x", "e"), c.text("y", "e"), c.text("z", "e"))});
        auto out = interval_json(ball, rec);
        out["x"] = c.text("x", "e");
        out["y"] = c.text("y", "e");
        out["z"] = c.text("z", "e");
        return out;
    }
    PiScanOptions opt;
    opt.r_list = c.int_list("r_list", {2, 3, 4});
    opt.samples = static_cast<std::size_t>(c.integer("samples", 10));
    opt.seed = c.seed();
    opt.slack = c.integer("slack", -1);
    opt.delta = c.maybe_number("delta");
    opt.memory_cap = c.memory_cap();
    const auto rows = pi_scan(c.group, opt);
    json out = json::array();
    std::vector<std::vector<std::string>> csv;
    for (const auto& row : rows) {
        json intervals = json::array();
        for (std::size_t i = 0; i < row.intervals.size(); ++i) {
            const auto& rec = row.intervals[i];
            const auto& label = row.labels[i];
            const auto a = label.find('|');
            const auto b = label.rfind('|');
            csv.push_back(interval_row(row.r, rec, label.substr(0, a), label.substr(a + 1, b - a - 1), label.substr(b + 1)));
            intervals.push_back({{"interval", label},
                                 {"status", rec.status()},
                                 {"pi", num(rec.bypass ? rec.pi : kInfinity)},
                                 {"pi_lower", num(rec.pi)},
                                 {"pi_upper", num(rec.pi_upper)}});
        }
        out.push_back({{"r", row.r},
                       {"working_radius", row.working_radius},
                       {"samples", row.samples},
                       {"no_bypass", row.no_bypass},
                       {"exact", row.exact},
                       {"min_pi", num(row.min_pi)},
                       {"median_pi", num(row.median_pi)},
                       {"gromov_bound", row.gromov_bound ? num(*row.gromov_bound) : json(nullptr)},
                       {"intervals", intervals}});
    }
    c.write_csv("pi.csv", header, csv);
    return {{"rows", out}};
}

json cmd_bigons(Context& c) {
    BigonScanOptions opt;
    opt.L_max = c.integer("L_max", 6);
    opt.budget = static_cast<std::size_t>(c.integer("budget", 200000));
    opt.seed = c.seed();
    opt.sphere_limit = static_cast<std::size_t>(c.integer("sphere_limit", 4096));
    opt.endpoint_samples = static_cast<std::size_t>(c.integer("endpoint_samples", 256));
    opt.pair_enum_limit = static_cast<std::size_t>(c.integer("pair_enum_limit", 8));
    opt.random_pairs = static_cast<std::size_t>(c.integer("random_pairs", 4));
    opt.metric_radius = c.integer("metric_radius", -1);
    opt.half_edges = c.has("half_edges") ? c.params().at("half_edges").get<bool>() : true;
    opt.memory_cap = c.memory_cap();
    const auto scan = bigon_scan(c.group, opt);
    std::vector<std::vector<std::string>> rows;
    const auto& gens = c.group.generators;
    for (const auto& b : scan.bigons) {
        const std::string len = b.half_edge ? std::to_string(b.length) + ".5" : std::to_string(b.length);
        rows.push_back({len, std::to_string(b.max_width), std::to_string(b.hausdorff_width), b.regular ? "true" : "false",
                        b.normalized ? "true" : "false", gens.format_word(b.side0), gens.format_word(b.side1)});
    }
    c.write_csv("bigons.csv", {"L", "max_width", "hausdorff_width", "regular", "normalized", "side0", "side1"}, rows);
    bool half_width = true;
    for (const auto& b : scan.bigons) half_width = half_width && b.half_width_holds;
    return {{"max_width", scan.max_width},
            {"count", scan.count},
            {"bigons", scan.bigons.size()},
            {"partial", scan.partial},
            {"partial_reason", scan.partial_reason},
            {"half_width_holds", half_width}};
}

json cmd_height(Context& c) {
    ProperFunction f;
    for (const auto& v : c.params().at("f")) {
        if (!v.is_number()) throw InvalidInput("f must hold numbers");
        f.samples.push_back(v.get<double>());
    }
    f.spacing = c.number("spacing", 1.0);
    const double k = c.number("k", 1.0);
    const auto h = height_hk(f, k, c.number("grid_step", 0.5));
    const double peak = f.samples.empty() ? 0.0 : *std::max_element(f.samples.begin(), f.samples.end());
    return {{"k", k},
            {"h", num(h.h)},
            {"p", num(h.p)},
            {"q", num(h.q)},
            {"grid_step", num(h.grid_step)},
            {"max_f", num(peak)},
            {"bound", num((2.0 * k + 1.0) * h.h)}};
}

json cmd_criteria(Context& c) {
    std::optional<double> k = c.maybe_number("k");
    const auto p = derive_parameters(c.number("A", 0), c.number("a", 0), c.number("B", 0), c.number("b", 0),
                                     c.integer("r", 0), k);
    const auto checks = verify_parameters(p, c.maybe_number("epsilon"));
    json out = {{"epsilon0", num(p.epsilon0)},
                {"n", p.n},
                {"k_interval", {num(p.k_low), num(p.k_high)}},
                {"k", num(p.k)},
                {"thresholds", {{"spacing", num(p.m_spacing)},
                                {"radius", num(p.m_radius)},
                                {"condition_a", num(p.m_condition_a)},
                                {"condition_b", num(p.m_condition_b)}}},
                {"M_required", num(p.m_required())},
                {"checks", {{"epsilon", num(checks.epsilon)},
                            {"n_range", checks.n_range},
                            {"epsilon_budget", checks.epsilon_budget},
                            {"k_range", checks.k_range}}}};
    if (c.has("harnack_L")) {
        const auto t = ta_to_wa(c.number("ta_epsilon", c.number("epsilon", p.epsilon0 / 2)), p.r,
                                c.number("harnack_L", 1.0), static_cast<std::size_t>(c.integer("ball_size", 1)));
        out["ta_to_wa"] = {{"raw", num(t.raw)}, {"value", num(t.value)}, {"out_of_range", t.out_of_range}};
    }
    return out;
}

json criterion_json(const CriterionReport& r) {
    json params = json::object();
    for (const auto& [k, v] : r.parameters) params[k] = num(v);
    json instances = json::array();
    for (const auto& i : r.instances)
        instances.push_back({{"label", i.label},
                             {"size", i.size},
                             {"threshold", i.threshold},
                             {"lower", num(i.lower)},
                             {"upper", num(i.upper)},
                             {"point", num(i.point)},
                             {"bound", num(i.bound)},
                             {"violation", i.violation},
                             {"certified", i.certified}});
    return {{"criterion", r.criterion},
            {"verdict", to_string(r.verdict)},
            {"witness", r.witness ? json(*r.witness) : json(nullptr)},
            {"caveat", r.caveat},
            {"statistic", num(r.statistic)},
            {"parameters", params},
            {"instances", instances}};
}

json cmd_report(Context& c) {
    ReportConfig rc;
    rc.green_radius = c.integer("green_radius", rc.green_radius);
    rc.rho_plus = c.maybe_number("rho_plus");
    rc.spectral_n_max = c.integer("spectral_n_max", rc.spectral_n_max);
    rc.settings.n_max = c.integer("n_max", rc.settings.n_max);
    rc.settings.threads = c.cfg.threads;
    rc.pi_r = c.int_list("pi_r", rc.pi_r);
    rc.pi_samples = static_cast<std::size_t>(c.integer("pi_samples", static_cast<int>(rc.pi_samples)));
    rc.bigon_L = c.integer("bigon_L", rc.bigon_L);
    rc.decay_r = c.int_list("decay_r", rc.decay_r);
    rc.epsilon = c.number("epsilon", rc.epsilon);
    rc.decay_samples = static_cast<std::size_t>(c.integer("decay_samples", static_cast<int>(rc.decay_samples)));
    rc.A = c.maybe_number("A");
    rc.a = c.maybe_number("a");
    rc.B = c.maybe_number("B");
    rc.b = c.maybe_number("b");
    rc.tails.c_list = c.int_list("c_list", rc.tails.c_list);
    rc.tails.per_sphere = static_cast<std::size_t>(c.integer("per_sphere", static_cast<int>(rc.tails.per_sphere)));
    rc.tails.seed = c.seed();
    rc.seed = c.seed();
    const auto report = hyperbolicity_report(c.group, c.mu, rc);

    json criteria = json::array();
    std::vector<std::vector<std::string>> rows;
    auto text = c.open("report.txt");
    text << "criterion        verdict                    statistic  witness\n";
    for (const auto& r : report.criteria) {
        criteria.push_back(criterion_json(r));
        char line[96];
        std::snprintf(line, sizeof line, "%-16s %-26s %-10s ", r.criterion.c_str(), to_string(r.verdict),
                      fmt(r.statistic).c_str());
        text << line << r.witness.value_or("-") << "\n";
        for (const auto& i : r.instances)
            rows.push_back({r.criterion, i.label, std::to_string(i.size), std::to_string(i.threshold), fmt(i.lower),
                            fmt(i.upper), fmt(i.point), fmt(i.bound), i.violation ? "true" : "false",
                            i.certified ? "true" : "false"});
    }
    text << "overall: " << to_string(report.overall) << "\n" << report.caveat << "\n";
    c.write_csv("criteria.csv",
                {"criterion", "label", "size", "threshold", "lower", "upper", "point", "bound", "violation", "certified"},
                rows);
    return {{"criteria", criteria}, {"overall", to_string(report.overall)}, {"caveat", report.caveat}};
}

using Command = std::function<json(Context&)>;

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> m = {
        {"ball", cmd_ball},   {"green", cmd_green},   {"spectral", cmd_spectral}, {"wa", cmd_wa},
        {"ta", cmd_ta},       {"bypass", cmd_bypass}, {"pi", cmd_pi},             {"bigons", cmd_bigons},
        {"height", cmd_height}, {"criteria", cmd_criteria}, {"report", cmd_report}};
    return m;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json measure_json(const Measure& mu, const GeneratorSet& gens) {
    json out = json::object();
    for (std::size_t s = 0; s < mu.size(); ++s) out[gens.label(s)] = to_string(mu.exact(s));
    return out;
}

} // namespace

GroupSpec parse_group(const json& j) {
    if (!j.is_object()) throw InvalidInput("group must be an object");
    if (!j.contains("type") || !j.at("type").is_string()) throw InvalidInput("group.type must be a string");
    const auto type = j.at("type").get<std::string>();
    const auto rank = [&]() {
        if (!j.contains("rank") || !j.at("rank").is_number_integer())
            throw InvalidInput("group.rank must be an integer for type " + type);
        return j.at("rank").get<int>();
    };
    GroupSpec spec;
    if (type == "free") {
        spec = GroupSpec::free(rank());
    } else if (type == "abelian") {
        spec = GroupSpec::free_abelian(rank());
    } else if (type == "free_product") {
        if (!j.contains("orders") || !j.at("orders").is_array()) throw InvalidInput("group.orders must be an array");
        std::vector<int> orders;
        for (const auto& o : j.at("orders")) {
            if (!o.is_number_integer()) throw InvalidInput("group.orders must hold integers");
            orders.push_back(o.get<int>());
        }
        spec = GroupSpec::free_product(orders);
    } else if (type == "direct_product") {
        if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").size() != 2)
            throw InvalidInput("group.factors must hold exactly two group objects");
        spec = GroupSpec::direct_product(parse_group(j.at("factors")[0]), parse_group(j.at("factors")[1]));
    } else if (type == "lamplighter") {
        spec = GroupSpec::lamplighter();
    } else {
        throw InvalidInput("unknown group type '" + type + "'");
    }
    if (j.contains("extra")) {
        if (!j.at("extra").is_array()) throw InvalidInput("group.extra must be an array of words");
        std::vector<std::string> words;
        for (const auto& w : j.at("extra")) {
            if (!w.is_string()) throw InvalidInput("group.extra must hold strings");
            words.push_back(w.get<std::string>());
        }
        spec = spec.with_extra(words);
    }
    validate(spec);
    return spec;
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
    static const std::set<std::string> known = {"group", "measure", "command", "params", "seed", "threads", "output"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw InvalidInput("unknown config key '" + key + "'");
    RunConfig c;
    c.document = doc;
    if (!doc.contains("group")) throw InvalidInput("config needs a group");
    c.group = parse_group(doc.at("group"));
    if (doc.contains("measure")) c.measure = doc.at("measure");
    if (!doc.contains("command") || !doc.at("command").is_string()) throw InvalidInput("config needs a command string");
    c.command = doc.at("command").get<std::string>();
    if (!commands().count(c.command)) throw InvalidInput("unknown command '" + c.command + "'");
    if (doc.contains("params")) {
        if (!doc.at("params").is_object()) throw InvalidInput("params must be an object");
        c.params = doc.at("params");
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer() || doc.at("seed").get<std::int64_t>() < 0)
            throw InvalidInput("seed must be a non-negative integer");
        c.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("threads")) {
        if (!doc.at("threads").is_number_integer() || doc.at("threads").get<std::int64_t>() < 1)
            throw InvalidInput("threads must be a positive integer");
        c.threads = doc.at("threads").get<unsigned>();
    }
    if (doc.contains("output")) {
        if (!doc.at("output").is_string()) throw InvalidInput("output must be a string");
        c.output = doc.at("output").get<std::string>();
    }
    return c;
}

std::vector<std::string> validate(const RunConfig& config) {
    std::vector<std::string> diags;
    const auto fields = fields_of(config.command);
    for (const auto& [key, value] : config.params.items()) {
        const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return key == f.key; });
        if (it == fields.end())
            diags.push_back("unknown parameter '" + key + "' for command " + config.command);
        else if (!matches(value, it->kind))
            diags.push_back("parameter '" + key + "' must be " + kind_name(it->kind));
    }
    for (const auto& f : fields)
        if (f.required && !config.params.contains(f.key))
            diags.push_back("command " + config.command + " needs parameter '" + f.key + "'");
    if (is_sampled(config) && !config.seed) diags.push_back("command " + config.command + " samples and needs a seed");

    std::optional<Group> group;
    try {
        group = make_group(config.group);
    } catch (const Error& e) {
        diags.push_back(e.what());
        return diags;
    }
    std::optional<Measure> mu;
    try {
        mu = parse_measure(config.measure, *group);
    } catch (const Error& e) {
        diags.push_back(std::string("measure: ") + e.what());
    }
    if (kTransientCommands.count(config.command) && classify_transience(config.group) == Transience::Recurrent)
        diags.push_back("transience guard: " + config.group.describe() +
                        " is virtually abelian of rank at most two, so the walk is recurrent and the Green function diverges");
    if (config.command == "bypass" && mu && config.params.contains("epsilon") && config.params.at("epsilon").is_number()) {
        const double eps = config.params.at("epsilon").get<double>();
        if (!(eps > 0.0) || eps >= mu->min_weight())
            diags.push_back("epsilon = " + fmt(eps) + " must lie in (0, min mu) = (0, " + fmt(mu->min_weight()) +
                            ") for the bypass decay bound");
    }
    if (config.command == "report" && mu && config.params.contains("epsilon") && config.params.at("epsilon").is_number()) {
        const double eps = config.params.at("epsilon").get<double>();
        if (!(eps > 0.0)) diags.push_back("epsilon must be positive");
    }
    return diags;
}

std::vector<std::string> validate(const json& doc) {
    try {
        return validate(parse_config(doc));
    } catch (const Error& e) {
        return {e.what()};
    } catch (const json::exception& e) {
        return {std::string("malformed config: ") + e.what()};
    }
}

std::string config_hash(const RunConfig& config) {
    json doc = config.document;
    doc.erase("threads");
    doc.erase("output");
    doc["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf;
}

json strip_timestamp(json report) {
    report.erase("timestamp");
    return report;
}

RunResult run(const RunConfig& config, const fs::path& out_dir) {
    RunResult result;
    fs::create_directories(out_dir);
    json& report = result.report;
    report["command"] = config.command;
    report["version"] = kVersion;
    report["config_hash"] = config_hash(config);
    report["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    report["group"] = config.group.describe();
    report["timestamp"] = timestamp();

    const auto finish = [&](int code, const std::string& status) {
        result.exit_code = code;
        report["status"] = status;
        std::ofstream os(out_dir / "report.json", std::ios::binary);
        os << report.dump(2) << "\n";
        result.files.insert(result.files.begin(), out_dir / "report.json");
        return result;
    };

    if (const auto diags = validate(config); !diags.empty()) {
        report["diagnostics"] = diags;
        return finish(2, "invalid");
    }
    try {
        Context ctx(config, out_dir, result.files);
        report["measure"] = measure_json(ctx.mu, ctx.group.generators);
        report["result"] = commands().at(config.command)(ctx);
        if (report["result"].contains("partial") && report["result"]["partial"].get<bool>())
            return finish(3, "partial");
        return finish(0, "ok");
    } catch (const InvalidInput& e) {
        report["error"] = e.what();
        return finish(2, "invalid");
    } catch (const RecurrentGroup& e) {
        report["error"] = e.what();
        return finish(2, "invalid");
    } catch (const BudgetExceeded& e) {
        report["error"] = e.what();
        return finish(3, "partial");
    } catch (const IncompleteBall& e) {
        report["error"] = e.what();
        return finish(3, "partial");
    } catch (const json::exception& e) {
        report["error"] = std::string("config value: ") + e.what();
        return finish(2, "invalid");
    } catch (const std::exception& e) {
        report["error"] = e.what();
        return finish(1, "failed");
    }
}

} // namespace hyperwalk::cli
