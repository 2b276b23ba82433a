#pragma once

#include "hyperwalk/exact.hpp"
#include "hyperwalk/groups.hpp"
#include "hyperwalk/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace hyperwalk {

using VertexId = std::uint32_t;
inline constexpr VertexId kOutside = ~VertexId{0};

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{3} << 30;

// Closed ball of radius R in the Cayley graph, vertices interned in BFS order
// so every sphere is a contiguous id range and id 0 is the center.
class Ball {
public:
    static Ball build(const Group& group, const GroupElement& center, int radius,
                      std::size_t memory_cap = kDefaultMemoryCap);

    const GroupOracle& oracle() const noexcept { return group_.oracle; }
    const GeneratorSet& generators() const noexcept { return group_.generators; }
    const Group& group() const noexcept { return group_; }

    int radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return depth_.size(); }
    std::size_t degree() const noexcept { return degree_; }
    const GroupElement& center() const noexcept { return center_; }

    std::optional<VertexId> find(const GroupElement& g) const;
    VertexId require(const GroupElement& g) const;
    GroupElement element(VertexId v) const;
    std::string format(VertexId v) const;

    // Distance from the center.
    int depth(VertexId v) const { return depth_.at(v); }
    VertexId neighbor(VertexId v, std::size_t s) const { return adjacency_[std::size_t{v} * degree_ + s]; }
    std::span<const VertexId> neighbors(VertexId v) const {
        return {adjacency_.data() + std::size_t{v} * degree_, degree_};
    }

    // Vertex ids at distance exactly k form [sphere_begin(k), sphere_begin(k+1)).
    VertexId sphere_begin(int k) const { return sphere_start_.at(k); }
    VertexId sphere_end(int k) const { return sphere_start_.at(k + 1); }
    std::vector<std::size_t> sphere_sizes() const;

    // In-ball BFS; -1 for unreached vertices. Stops expanding past max_depth when >= 0.
    std::vector<std::int32_t> distances_from(VertexId source, int max_depth = -1) const;

    std::size_t memory_bytes() const;

    void write_vertices_csv(std::ostream& os) const;
    void write_edges_csv(std::ostream& os) const;

private:
    Ball(Group group, GroupElement center, int radius);

    std::span<const std::uint8_t> key(VertexId v) const {
        return {arena_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::optional<VertexId> lookup(std::span<const std::uint8_t> bytes, std::uint64_t hash) const;
    void insert_slot(VertexId v, std::uint64_t hash);
    void grow_table();

    Group group_;
    GroupElement center_;
    int radius_ = 0;
    std::size_t degree_ = 0;
    std::vector<std::uint8_t> arena_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint16_t> depth_;
    std::vector<VertexId> adjacency_;
    std::vector<VertexId> sphere_start_;
    std::vector<VertexId> slots_;
};

// Byte encoding used to intern payloads; exposed for tests.
void encode_payload(std::span<const std::int32_t> payload, std::vector<std::uint8_t>& out);
Payload decode_payload(std::span<const std::uint8_t> bytes);

struct GeodesicInterval {
    VertexId x = 0;
    VertexId z = 0;
    int length = 0;
    std::vector<VertexId> members; // sorted by distance from x, then id
};

// Refuses with IncompleteBall unless depth(x) + depth(z) + |x-z| <= 2R, which
// keeps every member and every geodesic between them inside the ball.
GeodesicInterval geodesic_interval(const Ball& ball, VertexId x, VertexId z);

struct GeodesicWord {
    VertexId start = 0;
    std::vector<GenIndex> letters;
    std::vector<VertexId> vertices; // trace, size letters.size() + 1

    std::size_t length() const noexcept { return letters.size(); }
};

// Distance-decreasing DAG from x to z with exact path counts.
class GeodesicDag {
public:
    GeodesicDag(const Ball& ball, VertexId x, VertexId z);

    const GeodesicInterval& interval() const noexcept { return interval_; }
    const BigInt& count() const noexcept { return counts_.at(interval_.x); }

    // Lexicographic in generator index order; overflow set when more exist.
    std::vector<GeodesicWord> enumerate(std::size_t limit, bool& overflow) const;
    GeodesicWord sample(Rng& rng) const;

private:
    const BigInt& paths_to_end(VertexId v) const { return counts_.at(v); }

    const Ball* ball_;
    GeodesicInterval interval_;
    std::unordered_map<VertexId, int> to_end_;  // member -> distance to z
    std::unordered_map<VertexId, BigInt> counts_;
};

struct GeodesicList {
    std::vector<GeodesicWord> words;
    bool overflow = false;
};

GeodesicList enumerate_geodesics(const Ball& ball, VertexId x, VertexId z, std::size_t limit);

// Uniform integer in [0, n), n > 0.
BigInt random_below(const BigInt& n, Rng& rng);

} // namespace hyperwalk
