#include "hyperwalk/groups.hpp"

#include "hyperwalk/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace hyperwalk {

namespace detail {

class GroupImpl {
public:
    virtual ~GroupImpl() = default;

    // out must not alias g or h.
    virtual void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                          Payload& out) const = 0;
    virtual Payload invert(std::span<const std::int32_t> g) const = 0;
    virtual std::string format(std::span<const std::int32_t> g) const = 0;
    virtual Payload identity() const { return {}; }

    std::vector<std::string> letters;
    std::vector<std::size_t> inverse;
    std::vector<Payload> letter_payloads;
};

namespace {

std::string lower_letter(int i) { return std::string(1, static_cast<char>('a' + i)); }
std::string upper_letter(int i) { return std::string(1, static_cast<char>('A' + i)); }

class FreeImpl final : public GroupImpl {
public:
    explicit FreeImpl(int rank) {
        for (int i = 0; i < rank; ++i) {
            letters.push_back(lower_letter(i));
            letters.push_back(upper_letter(i));
            letter_payloads.push_back({i + 1});
            letter_payloads.push_back({-(i + 1)});
            inverse.push_back(letters.size() - 1);
            inverse.push_back(letters.size() - 2);
        }
    }

    void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                  Payload& out) const override {
        out.assign(g.begin(), g.end());
        for (std::int32_t x : h) {
            if (!out.empty() && out.back() == -x)
                out.pop_back();
            else
                out.push_back(x);
        }
    }

    Payload invert(std::span<const std::int32_t> g) const override {
        Payload out(g.rbegin(), g.rend());
        for (auto& x : out) x = -x;
        return out;
    }

    std::string format(std::span<const std::int32_t> g) const override {
        if (g.empty()) return "e";
        std::string s;
        for (std::int32_t x : g) s += x > 0 ? lower_letter(x - 1) : upper_letter(-x - 1);
        return s;
    }
};

class AbelianImpl final : public GroupImpl {
public:
    explicit AbelianImpl(int rank) : rank_(rank) {
        for (int i = 0; i < rank; ++i) {
            Payload e(rank, 0);
            e[i] = 1;
            letters.push_back(lower_letter(i));
            letter_payloads.push_back(e);
            e[i] = -1;
            letters.push_back(upper_letter(i));
            letter_payloads.push_back(e);
            inverse.push_back(letters.size() - 1);
            inverse.push_back(letters.size() - 2);
        }
    }

    Payload identity() const override { return Payload(rank_, 0); }

    void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                  Payload& out) const override {
        out.resize(rank_);
        for (int i = 0; i < rank_; ++i) out[i] = g[i] + h[i];
    }

    Payload invert(std::span<const std::int32_t> g) const override {
        Payload out(g.begin(), g.end());
        for (auto& x : out) x = -x;
        return out;
    }

    std::string format(std::span<const std::int32_t> g) const override {
        std::string s = "(";
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(g[i]);
        }
        return s + ")";
    }

private:
    int rank_;
};

// Payload: (factor, exponent) pairs, adjacent factors distinct, 0 < exponent < order.
class FreeProductImpl final : public GroupImpl {
public:
    explicit FreeProductImpl(std::vector<int> orders) : orders_(std::move(orders)) {
        for (int i = 0; i < static_cast<int>(orders_.size()); ++i) {
            letters.push_back(lower_letter(i));
            letter_payloads.push_back({i, 1});
            if (orders_[i] == 2) {
                inverse.push_back(letters.size() - 1);
            } else {
                letters.push_back(upper_letter(i));
                letter_payloads.push_back({i, orders_[i] - 1});
                inverse.push_back(letters.size() - 1);
                inverse.push_back(letters.size() - 2);
            }
        }
    }

    void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                  Payload& out) const override {
        out.assign(g.begin(), g.end());
        for (std::size_t i = 0; i < h.size(); i += 2) {
            const std::int32_t f = h[i];
            const std::int32_t e = h[i + 1];
            if (!out.empty() && out[out.size() - 2] == f) {
                const std::int32_t sum = (out.back() + e) % orders_[f];
                if (sum == 0) {
                    out.resize(out.size() - 2);
                } else {
                    out.back() = sum;
                }
            } else {
                out.push_back(f);
                out.push_back(e);
            }
        }
    }

    Payload invert(std::span<const std::int32_t> g) const override {
        Payload out;
        out.reserve(g.size());
        for (std::size_t i = g.size(); i >= 2; i -= 2) {
            out.push_back(g[i - 2]);
            out.push_back(orders_[g[i - 2]] - g[i - 1]);
        }
        return out;
    }

    std::string format(std::span<const std::int32_t> g) const override {
        if (g.empty()) return "e";
        std::string s;
        for (std::size_t i = 0; i < g.size(); i += 2) {
            s += lower_letter(g[i]);
            if (g[i + 1] != 1) s += "^" + std::to_string(g[i + 1]);
        }
        return s;
    }

private:
    std::vector<int> orders_;
};

// Payload: head position followed by the sorted lit lamps.
class LamplighterImpl final : public GroupImpl {
public:
    LamplighterImpl() {
        letters = {"t", "T", "a"};
        letter_payloads = {{1}, {-1}, {0, 0}};
        inverse = {1, 0, 2};
    }

    Payload identity() const override { return {0}; }

    void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                  Payload& out) const override {
        const std::int32_t shift = g[0];
        out.clear();
        out.push_back(g[0] + h[0]);
        std::size_t i = 1;
        std::size_t j = 1;
        while (i < g.size() || j < h.size()) {
            if (j == h.size() || (i < g.size() && g[i] < h[j] + shift)) {
                out.push_back(g[i++]);
            } else if (i == g.size() || h[j] + shift < g[i]) {
                out.push_back(h[j++] + shift);
            } else {
                ++i;
                ++j;
            }
        }
    }

    Payload invert(std::span<const std::int32_t> g) const override {
        Payload out(g.begin(), g.end());
        for (std::size_t i = 1; i < out.size(); ++i) out[i] -= g[0];
        out[0] = -g[0];
        return out;
    }

    std::string format(std::span<const std::int32_t> g) const override {
        std::string s = "{";
        for (std::size_t i = 1; i < g.size(); ++i) {
            if (i > 1) s += ',';
            s += std::to_string(g[i]);
        }
        return s + "}@" + std::to_string(g[0]);
    }
};

// Payload: left payload length, left payload, right payload.
class DirectProductImpl final : public GroupImpl {
public:
    DirectProductImpl(std::shared_ptr<const GroupImpl> left, std::shared_ptr<const GroupImpl> right)
        : left_(std::move(left)), right_(std::move(right)) {
        const Payload left_id = left_->identity();
        const Payload right_id = right_->identity();
        for (std::size_t i = 0; i < left_->letters.size(); ++i) {
            letters.push_back(left_->letters[i] + "1");
            inverse.push_back(left_->inverse[i]);
            letter_payloads.push_back(join(left_->letter_payloads[i], right_id));
        }
        const std::size_t offset = letters.size();
        for (std::size_t i = 0; i < right_->letters.size(); ++i) {
            letters.push_back(right_->letters[i] + "2");
            inverse.push_back(right_->inverse[i] + offset);
            letter_payloads.push_back(join(left_id, right_->letter_payloads[i]));
        }
    }

    Payload identity() const override { return join(left_->identity(), right_->identity()); }

    void multiply(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                  Payload& out) const override {
        thread_local Payload left_out;
        thread_local Payload right_out;
        const auto gl = g.subspan(1, g[0]);
        const auto hl = h.subspan(1, h[0]);
        left_->multiply(gl, hl, left_out);
        right_->multiply(g.subspan(1 + g[0]), h.subspan(1 + h[0]), right_out);
        out.clear();
        out.push_back(static_cast<std::int32_t>(left_out.size()));
        out.insert(out.end(), left_out.begin(), left_out.end());
        out.insert(out.end(), right_out.begin(), right_out.end());
    }

    Payload invert(std::span<const std::int32_t> g) const override {
        return join(left_->invert(g.subspan(1, g[0])), right_->invert(g.subspan(1 + g[0])));
    }

    std::string format(std::span<const std::int32_t> g) const override {
        return "(" + left_->format(g.subspan(1, g[0])) + ", " + right_->format(g.subspan(1 + g[0])) +
               ")";
    }

private:
    static Payload join(const Payload& l, const Payload& r) {
        Payload out;
        out.push_back(static_cast<std::int32_t>(l.size()));
        out.insert(out.end(), l.begin(), l.end());
        out.insert(out.end(), r.begin(), r.end());
        return out;
    }

    std::shared_ptr<const GroupImpl> left_;
    std::shared_ptr<const GroupImpl> right_;
};

std::shared_ptr<const GroupImpl> make_impl(const GroupSpec& spec) {
    switch (spec.kind) {
    case GroupKind::Free: return std::make_shared<FreeImpl>(spec.rank);
    case GroupKind::FreeAbelian: return std::make_shared<AbelianImpl>(spec.rank);
    case GroupKind::FreeProduct: return std::make_shared<FreeProductImpl>(spec.orders);
    case GroupKind::Lamplighter: return std::make_shared<LamplighterImpl>();
    case GroupKind::DirectProduct:
        return std::make_shared<DirectProductImpl>(make_impl(spec.factors[0]),
                                                   make_impl(spec.factors[1]));
    }
    throw InvalidInput("unknown group kind");
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::size_t> tokenize_over(const std::vector<std::string>& labels, std::string_view word) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < word.size()) {
        std::size_t best = labels.size();
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto& l = labels[i];
            if (l.size() > best_len && word.substr(pos, l.size()) == l) {
                best = i;
                best_len = l.size();
            }
        }
        if (best == labels.size())
            throw InvalidInput("cannot parse '" + std::string(word) + "' at offset " + std::to_string(pos));
        out.push_back(best);
        pos += best_len;
    }
    return out;
}

} // namespace
} // namespace detail

GroupSpec GroupSpec::free(int rank) {
    GroupSpec s;
    s.kind = GroupKind::Free;
    s.rank = rank;
    return s;
}

GroupSpec GroupSpec::free_abelian(int rank) {
    GroupSpec s;
    s.kind = GroupKind::FreeAbelian;
    s.rank = rank;
    return s;
}

GroupSpec GroupSpec::free_product(std::vector<int> orders) {
    GroupSpec s;
    s.kind = GroupKind::FreeProduct;
    s.orders = std::move(orders);
    return s;
}

GroupSpec GroupSpec::direct_product(GroupSpec left, GroupSpec right) {
    GroupSpec s;
    s.kind = GroupKind::DirectProduct;
    s.factors = {std::move(left), std::move(right)};
    return s;
}

GroupSpec GroupSpec::lamplighter() {
    GroupSpec s;
    s.kind = GroupKind::Lamplighter;
    return s;
}

GroupSpec GroupSpec::with_extra(std::vector<std::string> words) const {
    GroupSpec s = *this;
    s.extra = std::move(words);
    return s;
}

std::string GroupSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
    case GroupKind::Free: os << "Free(" << rank << ")"; break;
    case GroupKind::FreeAbelian: os << "FreeAbelian(" << rank << ")"; break;
    case GroupKind::Lamplighter: os << "Lamplighter"; break;
    case GroupKind::FreeProduct:
        os << "FreeProduct(";
        for (std::size_t i = 0; i < orders.size(); ++i) os << (i ? "," : "") << orders[i];
        os << ")";
        break;
    case GroupKind::DirectProduct:
        os << "DirectProduct(";
        for (std::size_t i = 0; i < factors.size(); ++i) os << (i ? "," : "") << factors[i].describe();
        os << ")";
        break;
    }
    if (!extra.empty()) {
        os << "+{";
        for (std::size_t i = 0; i < extra.size(); ++i) os << (i ? "," : "") << extra[i];
        os << "}";
    }
    return os.str();
}

void validate(const GroupSpec& spec) {
    switch (spec.kind) {
    case GroupKind::Free:
    case GroupKind::FreeAbelian:
        if (spec.rank < 1) throw InvalidInput("rank must be at least 1");
        if (spec.rank > 26) throw InvalidInput("rank above 26 is not supported");
        break;
    case GroupKind::FreeProduct:
        if (spec.orders.size() < 2) throw InvalidInput("free product needs at least two factors");
        if (spec.orders.size() > 26) throw InvalidInput("more than 26 factors is not supported");
        for (int m : spec.orders)
            if (m < 2) throw InvalidInput("cyclic factor order must be at least 2");
        break;
    case GroupKind::DirectProduct:
        if (spec.factors.size() != 2) throw InvalidInput("direct product needs exactly two factors");
        for (const auto& f : spec.factors) {
            if (!f.extra.empty()) throw InvalidInput("extra generators belong on the outer group");
            validate(f);
        }
        break;
    case GroupKind::Lamplighter: break;
    }
}

std::optional<int> virtual_abelian_rank(const GroupSpec& spec) {
    switch (spec.kind) {
    case GroupKind::Free: return spec.rank == 1 ? std::optional<int>(1) : std::nullopt;
    case GroupKind::FreeAbelian: return spec.rank;
    case GroupKind::FreeProduct:
        if (spec.orders == std::vector<int>{2, 2}) return 1;
        return std::nullopt;
    case GroupKind::Lamplighter: return std::nullopt;
    case GroupKind::DirectProduct: {
        const auto l = virtual_abelian_rank(spec.factors.at(0));
        const auto r = virtual_abelian_rank(spec.factors.at(1));
        if (l && r) return *l + *r;
        return std::nullopt;
    }
    }
    return std::nullopt;
}

Transience classify_transience(const GroupSpec& spec) {
    const auto d = virtual_abelian_rank(spec);
    return d && *d <= 2 ? Transience::Recurrent : Transience::Transient;
}

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int32_t x : g.payload) {
        h ^= static_cast<std::uint32_t>(x);
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

GroupOracle::GroupOracle(const GroupSpec& spec) : spec_(spec) {
    validate(spec_);
    GroupSpec base = spec_;
    base.extra.clear();
    fingerprint_ = detail::fnv1a(base.describe());
    impl_ = detail::make_impl(spec_);
}

void GroupOracle::check(const GroupElement& g) const {
    if (g.oracle != fingerprint_) throw InvalidInput("element belongs to a different group oracle");
}

GroupElement GroupOracle::identity() const { return wrap(impl_->identity()); }

GroupElement GroupOracle::multiply(const GroupElement& g, const GroupElement& h) const {
    check(g);
    check(h);
    Payload out;
    impl_->multiply(g.payload, h.payload, out);
    return wrap(std::move(out));
}

void GroupOracle::multiply_into(std::span<const std::int32_t> g, std::span<const std::int32_t> h,
                                Payload& out) const {
    impl_->multiply(g, h, out);
}

GroupElement GroupOracle::invert(const GroupElement& g) const {
    check(g);
    return wrap(impl_->invert(g.payload));
}

std::string GroupOracle::format(const GroupElement& g) const {
    check(g);
    return impl_->format(g.payload);
}

bool GroupOracle::is_identity(const GroupElement& g) const {
    check(g);
    return g.payload == impl_->identity();
}

const std::vector<std::string>& GroupOracle::letters() const { return impl_->letters; }

std::size_t GroupOracle::inverse_letter(std::size_t i) const { return impl_->inverse.at(i); }

GroupElement GroupOracle::letter(std::size_t i) const { return wrap(impl_->letter_payloads.at(i)); }

std::vector<std::size_t> GroupOracle::tokenize(std::string_view word) const {
    return detail::tokenize_over(impl_->letters, word);
}

GroupElement GroupOracle::evaluate(std::span<const std::size_t> letters) const {
    Payload acc = impl_->identity();
    Payload out;
    for (std::size_t i : letters) {
        impl_->multiply(acc, impl_->letter_payloads.at(i), out);
        acc.swap(out);
    }
    return wrap(std::move(acc));
}

GroupElement GroupOracle::evaluate(std::string_view word) const {
    if (word.empty() || word == "e") return identity();
    const auto t = tokenize(word);
    return evaluate(t);
}

GeneratorSet::GeneratorSet(const GroupOracle& oracle) {
    const auto& letters = oracle.letters();
    for (std::size_t i = 0; i < letters.size(); ++i) {
        labels_.push_back(letters[i]);
        elements_.push_back(oracle.letter(i));
        inverse_.push_back(oracle.inverse_letter(i));
    }
    for (const auto& word : oracle.spec().extra) {
        const auto tokens = oracle.tokenize(word);
        if (tokens.empty()) throw InvalidInput("empty extra generator");
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
            if (oracle.inverse_letter(tokens[i]) == tokens[i + 1])
                throw InvalidInput("extra generator '" + word + "' is not reduced");
        const GroupElement g = oracle.evaluate(tokens);
        if (oracle.is_identity(g)) throw InvalidInput("extra generator '" + word + "' is the identity");

        std::string inverse_label;
        for (auto it = tokens.rbegin(); it != tokens.rend(); ++it)
            inverse_label += letters[oracle.inverse_letter(*it)];
        for (const auto& l : labels_)
            if (l == word || l == inverse_label)
                throw InvalidInput("extra generator '" + word + "' duplicates an existing label");

        const GroupElement g_inv = oracle.invert(g);
        labels_.push_back(word);
        elements_.push_back(g);
        if (g_inv == g) {
            inverse_.push_back(labels_.size() - 1);
        } else {
            labels_.push_back(inverse_label);
            elements_.push_back(g_inv);
            inverse_.push_back(labels_.size() - 1);
            inverse_.push_back(labels_.size() - 2);
        }
    }
    if (labels_.size() > 65535) throw InvalidInput("generating set too large");
}

std::optional<std::size_t> GeneratorSet::find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    return std::nullopt;
}

std::vector<GenIndex> GeneratorSet::parse_word(std::string_view word) const {
    if (word.empty() || word == "e") return {};
    std::vector<GenIndex> out;
    for (std::size_t i : detail::tokenize_over(labels_, word)) out.push_back(static_cast<GenIndex>(i));
    return out;
}

GroupElement GeneratorSet::evaluate(const GroupOracle& oracle, std::span<const GenIndex> word) const {
    GroupElement acc = oracle.identity();
    for (GenIndex s : word) acc = oracle.multiply(acc, elements_.at(s));
    return acc;
}

std::string GeneratorSet::format_word(std::span<const GenIndex> word) const {
    if (word.empty()) return "e";
    std::string s;
    for (GenIndex i : word) s += labels_.at(i);
    return s;
}

Group make_group(const GroupSpec& spec) {
    GroupOracle oracle(spec);
    GeneratorSet gens(oracle);
    return Group{std::move(oracle), std::move(gens)};
}

} // namespace hyperwalk
