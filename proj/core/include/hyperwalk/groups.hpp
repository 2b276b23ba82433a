#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hyperwalk {

enum class GroupKind { Free, FreeAbelian, FreeProduct, DirectProduct, Lamplighter };

// Catalog description of a finitely generated group plus optional extra
// generator words over the base alphabet.
struct GroupSpec {
    GroupKind kind = GroupKind::Free;
    int rank = 0;                   // Free, FreeAbelian
    std::vector<int> orders;        // FreeProduct: cyclic factor orders
    std::vector<GroupSpec> factors; // DirectProduct: exactly two
    std::vector<std::string> extra;

    static GroupSpec free(int rank);
    static GroupSpec free_abelian(int rank);
    static GroupSpec free_product(std::vector<int> orders);
    static GroupSpec direct_product(GroupSpec left, GroupSpec right);
    static GroupSpec lamplighter();

    GroupSpec with_extra(std::vector<std::string> words) const;

    std::string describe() const;
    friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

// Throws InvalidInput on rank <= 0, order < 2, wrong factor count.
void validate(const GroupSpec& spec);

enum class Transience { Transient, Recurrent };

// Recurrent exactly when the group is virtually Z^d with d <= 2.
Transience classify_transience(const GroupSpec& spec);
std::optional<int> virtual_abelian_rank(const GroupSpec& spec);

using Payload = std::vector<std::int32_t>;

// A group element in the oracle's normal form. The fingerprint ties it to the
// oracle that produced it.
struct GroupElement {
    Payload payload;
    std::uint64_t oracle = 0;

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const noexcept;
};

namespace detail {
class GroupImpl;
}

// Multiplication, inversion and printing on normal forms. Cheap to copy.
class GroupOracle {
public:
    explicit GroupOracle(const GroupSpec& spec);

    const GroupSpec& spec() const noexcept { return spec_; }
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    GroupElement identity() const;
    GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
    GroupElement invert(const GroupElement& g) const;
    std::string format(const GroupElement& g) const;
    bool is_identity(const GroupElement& g) const;

    // Base alphabet; inverse_letter(i) is the index of the inverse letter.
    const std::vector<std::string>& letters() const;
    std::size_t inverse_letter(std::size_t i) const;
    GroupElement letter(std::size_t i) const;

    // Greedy longest-match tokenization over the base alphabet.
    std::vector<std::size_t> tokenize(std::string_view word) const;
    GroupElement evaluate(std::span<const std::size_t> letters) const;
    GroupElement evaluate(std::string_view word) const;

    // Allocation-free product on raw payloads, used by ball construction.
    void multiply_into(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                       Payload& out) const;

    GroupElement wrap(Payload payload) const { return GroupElement{std::move(payload), fingerprint_}; }

private:
    void check(const GroupElement& g) const;

    GroupSpec spec_;
    std::uint64_t fingerprint_ = 0;
    std::shared_ptr<const detail::GroupImpl> impl_;
};

using GenIndex = std::uint16_t;

// Symmetric generating set: base letters first, then each extra word and its
// inverse (a single entry when the extra element is an involution).
class GeneratorSet {
public:
    GeneratorSet() = default;
    explicit GeneratorSet(const GroupOracle& oracle);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const GroupElement& element(std::size_t i) const { return elements_.at(i); }
    std::size_t inverse(std::size_t i) const { return inverse_.at(i); }
    std::optional<std::size_t> find(std::string_view label) const;

    // Parses a word over generator labels (greedy longest match); "" and "e" are the identity.
    std::vector<GenIndex> parse_word(std::string_view word) const;
    GroupElement evaluate(const GroupOracle& oracle, std::span<const GenIndex> word) const;
    std::string format_word(std::span<const GenIndex> word) const;

private:
    std::vector<std::string> labels_;
    std::vector<GroupElement> elements_;
    std::vector<std::size_t> inverse_;
};

struct Group {
    GroupOracle oracle;
    GeneratorSet generators;
};

Group make_group(const GroupSpec& spec);

} // namespace hyperwalk
