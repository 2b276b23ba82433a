#include "hyperwalk/cayley.hpp"

#include "hyperwalk/csv.hpp"
#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>

namespace hyperwalk {

namespace {

constexpr std::uint8_t kWideMarker = 0x80;

std::uint64_t hash_bytes(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ bytes.size();
    for (std::uint8_t c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

constexpr VertexId kEmptySlot = ~VertexId{0};

} // namespace

void encode_payload(std::span<const std::int32_t> payload, std::vector<std::uint8_t>& out) {
    out.clear();
    for (std::int32_t x : payload) {
        if (x >= -127 && x <= 127) {
            out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(x)));
        } else {
            out.push_back(kWideMarker);
            const auto u = static_cast<std::uint32_t>(x);
            for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
        }
    }
}

Payload decode_payload(std::span<const std::uint8_t> bytes) {
    Payload out;
    for (std::size_t i = 0; i < bytes.size();) {
        if (bytes[i] == kWideMarker) {
            std::uint32_t u = 0;
            for (int k = 0; k < 4; ++k) u |= std::uint32_t{bytes[i + 1 + k]} << (8 * k);
            out.push_back(static_cast<std::int32_t>(u));
            i += 5;
        } else {
            out.push_back(static_cast<std::int8_t>(bytes[i]));
            ++i;
        }
    }
    return out;
}

Ball::Ball(Group group, GroupElement center, int radius)
    : group_(std::move(group)), center_(std::move(center)), radius_(radius),
      degree_(group_.generators.size()) {}

Ball Ball::build(const Group& group, const GroupElement& center, int radius, std::size_t memory_cap) {
    if (radius < 0) throw InvalidInput("ball radius must be non-negative");
    if (radius > 65535) throw InvalidInput("ball radius too large");
    if (memory_cap == 0) throw InvalidInput("memory cap must be positive");
    if (center.oracle != group.oracle.fingerprint())
        throw InvalidInput("ball center belongs to a different group oracle");

    Ball b(group, center, radius);
    const auto& gens = b.group_.generators;
    std::vector<Payload> gen_payloads;
    for (std::size_t s = 0; s < gens.size(); ++s) gen_payloads.push_back(gens.element(s).payload);

    std::vector<std::uint8_t> enc;
    encode_payload(center.payload, enc);
    b.offsets_.push_back(0);
    b.arena_.insert(b.arena_.end(), enc.begin(), enc.end());
    b.offsets_.push_back(b.arena_.size());
    b.depth_.push_back(0);
    b.slots_.assign(1024, kEmptySlot);
    b.insert_slot(0, hash_bytes(enc));

    Payload cur;
    Payload out;
    for (VertexId v = 0; v < b.size(); ++v) {
        const int d = b.depth_[v];
        cur = decode_payload(b.key(v));
        for (std::size_t s = 0; s < b.degree_; ++s) {
            b.oracle().multiply_into(cur, gen_payloads[s], out);
            encode_payload(out, enc);
            const std::uint64_t h = hash_bytes(enc);
            if (auto found = b.lookup(enc, h)) {
                b.adjacency_.push_back(*found);
            } else if (d < radius) {
                const auto id = static_cast<VertexId>(b.size());
                if (id == kOutside) throw BudgetExceeded("vertex id space exhausted");
                b.arena_.insert(b.arena_.end(), enc.begin(), enc.end());
                b.offsets_.push_back(b.arena_.size());
                b.depth_.push_back(static_cast<std::uint16_t>(d + 1));
                if (2 * b.size() > b.slots_.size()) b.grow_table();
                b.insert_slot(id, h);
                b.adjacency_.push_back(id);
                if ((id & 0xfff) == 0 && b.memory_bytes() > memory_cap)
                    throw BudgetExceeded("memory cap of " + std::to_string(memory_cap) +
                                         " bytes exceeded while building radius " + std::to_string(d + 1) +
                                         "; complete through radius " + std::to_string(d) + " (" +
                                         std::to_string(b.size()) + " vertices)");
            } else {
                b.adjacency_.push_back(kOutside);
            }
        }
    }

    b.sphere_start_.assign(static_cast<std::size_t>(radius) + 2, static_cast<VertexId>(b.size()));
    for (VertexId v = b.size(); v-- > 0;) b.sphere_start_[b.depth_[v]] = v;
    for (int k = radius; k >= 0; --k)
        b.sphere_start_[k] = std::min(b.sphere_start_[k], b.sphere_start_[k + 1]);
    return b;
}

std::optional<VertexId> Ball::lookup(std::span<const std::uint8_t> bytes, std::uint64_t hash) const {
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash & mask;; i = (i + 1) & mask) {
        const VertexId id = slots_[i];
        if (id == kEmptySlot) return std::nullopt;
        const auto k = key(id);
        if (k.size() == bytes.size() && std::equal(k.begin(), k.end(), bytes.begin())) return id;
    }
}

void Ball::insert_slot(VertexId v, std::uint64_t hash) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = hash & mask;
    while (slots_[i] != kEmptySlot) i = (i + 1) & mask;
    slots_[i] = v;
}

void Ball::grow_table() {
    slots_.assign(slots_.size() * 2, kEmptySlot);
    for (VertexId v = 0; v < size(); ++v) insert_slot(v, hash_bytes(key(v)));
}

std::optional<VertexId> Ball::find(const GroupElement& g) const {
    if (g.oracle != oracle().fingerprint()) throw InvalidInput("element belongs to a different group oracle");
    std::vector<std::uint8_t> enc;
    encode_payload(g.payload, enc);
    return lookup(enc, hash_bytes(enc));
}

VertexId Ball::require(const GroupElement& g) const {
    if (auto v = find(g)) return *v;
    throw IncompleteBall("element " + oracle().format(g) + " is outside the ball of radius " +
                         std::to_string(radius_));
}

GroupElement Ball::element(VertexId v) const { return oracle().wrap(decode_payload(key(v))); }

std::string Ball::format(VertexId v) const { return oracle().format(element(v)); }

std::vector<std::size_t> Ball::sphere_sizes() const {
    std::vector<std::size_t> out;
    for (int k = 0; k <= radius_; ++k) out.push_back(sphere_end(k) - sphere_begin(k));
    return out;
}

std::vector<std::int32_t> Ball::distances_from(VertexId source, int max_depth) const {
    std::vector<std::int32_t> dist(size(), -1);
    std::vector<VertexId> queue;
    queue.reserve(64);
    dist.at(source) = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId v = queue[head];
        if (max_depth >= 0 && dist[v] >= max_depth) continue;
        for (VertexId u : neighbors(v)) {
            if (u != kOutside && dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

std::size_t Ball::memory_bytes() const {
    return arena_.capacity() + offsets_.capacity() * sizeof(std::uint64_t) +
           depth_.capacity() * sizeof(std::uint16_t) + adjacency_.capacity() * sizeof(VertexId) +
           slots_.capacity() * sizeof(VertexId);
}

void Ball::write_vertices_csv(std::ostream& os) const {
    os << "id,normal_form,distance\r\n";
    for (VertexId v = 0; v < size(); ++v) os << v << ',' << csv_field(format(v)) << ',' << depth(v) << "\r\n";
}

void Ball::write_edges_csv(std::ostream& os) const {
    os << "source,generator,target\r\n";
    for (VertexId v = 0; v < size(); ++v)
        for (std::size_t s = 0; s < degree_; ++s)
            if (const VertexId u = neighbor(v, s); u != kOutside)
                os << v << ',' << csv_field(generators().label(s)) << ',' << u << "\r\n";
}

GeodesicInterval geodesic_interval(const Ball& ball, VertexId x, VertexId z) {
    const int reach = ball.depth(x) + ball.depth(z);
    const auto dx = ball.distances_from(x, reach);
    const int length = dx.at(z);
    if (length < 0 || reach + length > 2 * ball.radius())
        throw IncompleteBall("interval between " + ball.format(x) + " and " + ball.format(z) +
                             " is not certified complete in a ball of radius " + std::to_string(ball.radius()));
    const auto dz = ball.distances_from(z, length);
    GeodesicInterval out;
    out.x = x;
    out.z = z;
    out.length = length;
    for (VertexId v = 0; v < ball.size(); ++v)
        if (dx[v] >= 0 && dz[v] >= 0 && dx[v] + dz[v] == length) out.members.push_back(v);
    std::stable_sort(out.members.begin(), out.members.end(),
                     [&](VertexId a, VertexId b) { return dx[a] < dx[b]; });
    return out;
}

GeodesicDag::GeodesicDag(const Ball& ball, VertexId x, VertexId z)
    : ball_(&ball), interval_(geodesic_interval(ball, x, z)) {
    const auto dz = ball.distances_from(z, interval_.length);
    for (VertexId m : interval_.members) to_end_[m] = dz[m];
    // Members are sorted by distance from x; walk them backwards so successors come first.
    for (auto it = interval_.members.rbegin(); it != interval_.members.rend(); ++it) {
        const VertexId m = *it;
        if (m == z) {
            counts_[m] = 1;
            continue;
        }
        BigInt total = 0;
        for (VertexId u : ball.neighbors(m)) {
            if (u == kOutside) continue;
            const auto e = to_end_.find(u);
            if (e != to_end_.end() && e->second == to_end_[m] - 1) total += counts_.at(u);
        }
        counts_[m] = total;
    }
}

std::vector<GeodesicWord> GeodesicDag::enumerate(std::size_t limit, bool& overflow) const {
    std::vector<GeodesicWord> out;
    overflow = count() > limit;
    GeodesicWord cur;
    cur.start = interval_.x;
    cur.vertices.push_back(interval_.x);
    const auto recurse = [&](auto&& self, VertexId v) -> void {
        if (out.size() >= limit) return;
        if (v == interval_.z) {
            out.push_back(cur);
            return;
        }
        const int here = to_end_.at(v);
        for (std::size_t s = 0; s < ball_->degree(); ++s) {
            const VertexId u = ball_->neighbor(v, s);
            if (u == kOutside) continue;
            const auto e = to_end_.find(u);
            if (e == to_end_.end() || e->second != here - 1) continue;
            cur.letters.push_back(static_cast<GenIndex>(s));
            cur.vertices.push_back(u);
            self(self, u);
            cur.letters.pop_back();
            cur.vertices.pop_back();
            if (out.size() >= limit) return;
        }
    };
    recurse(recurse, interval_.x);
    return out;
}

GeodesicWord GeodesicDag::sample(Rng& rng) const {
    GeodesicWord out;
    out.start = interval_.x;
    out.vertices.push_back(interval_.x);
    VertexId v = interval_.x;
    while (v != interval_.z) {
        BigInt pick = random_below(paths_to_end(v), rng);
        const int here = to_end_.at(v);
        for (std::size_t s = 0; s < ball_->degree(); ++s) {
            const VertexId u = ball_->neighbor(v, s);
            if (u == kOutside) continue;
            const auto e = to_end_.find(u);
            if (e == to_end_.end() || e->second != here - 1) continue;
            const BigInt& c = paths_to_end(u);
            if (pick < c) {
                out.letters.push_back(static_cast<GenIndex>(s));
                out.vertices.push_back(u);
                v = u;
                break;
            }
            pick -= c;
        }
    }
    return out;
}

GeodesicList enumerate_geodesics(const Ball& ball, VertexId x, VertexId z, std::size_t limit) {
    if (limit == 0) throw InvalidInput("geodesic enumeration limit must be positive");
    GeodesicDag dag(ball, x, z);
    GeodesicList out;
    out.words = dag.enumerate(limit, out.overflow);
    return out;
}

BigInt random_below(const BigInt& n, Rng& rng) {
    if (n <= 0) throw InvalidInput("random_below needs a positive bound");
    if (n <= BigInt(std::numeric_limits<std::uint64_t>::max()))
        return BigInt(rng.below(n.convert_to<std::uint64_t>()));
    const std::size_t bits = boost::multiprecision::msb(n) + 1;
    const std::size_t words = (bits + 63) / 64;
    const BigInt mask = (BigInt(1) << bits) - 1;
    for (;;) {
        BigInt r = 0;
        for (std::size_t i = 0; i < words; ++i) r = (r << 64) | BigInt(rng());
        r &= mask;
        if (r < n) return r;
    }
}

} // namespace hyperwalk
