#pragma once

// Reference values computed without the library's balls or convolutions.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Distance-from-root chain of simple random walk on the (q+1)-regular tree.
// Returns P{at the root after n steps} for n = 0..steps.
inline std::vector<long double> tree_returns(int q, int steps) {
    const long double up = static_cast<long double>(q) / (q + 1);
    const long double down = 1.0L / (q + 1);
    std::vector<long double> dist(steps + 2, 0.0L), next(steps + 2, 0.0L);
    dist[0] = 1.0L;
    std::vector<long double> out{1.0L};
    for (int n = 1; n <= steps; ++n) {
        std::fill(next.begin(), next.end(), 0.0L);
        next[1] += dist[0];
        for (int d = 1; d <= n && d + 1 < static_cast<int>(dist.size()); ++d) {
            next[d + 1] += up * dist[d];
            next[d - 1] += down * dist[d];
        }
        dist.swap(next);
        out.push_back(dist[0]);
    }
    return out;
}

// Green function at the root, summed until the terms are negligible.
inline double tree_green(int q, int steps = 4000) {
    long double g = 0.0L;
    for (long double p : tree_returns(q, steps)) g += p;
    return static_cast<double>(g);
}

inline double kesten(int rank) { return std::sqrt(2.0 * rank - 1.0) / rank; }

inline std::size_t free_sphere(int rank, int n) {
    if (n == 0) return 1;
    std::size_t s = 2 * rank;
    for (int i = 1; i < n; ++i) s *= 2 * rank - 1;
    return s;
}

// Lattice points of Z^d with L1 norm exactly n.
inline std::size_t lattice_sphere(int d, int n) {
    // Points with L1 norm <= n in dimension d, by recursion on the first coordinate.
    std::map<std::pair<int, int>, std::size_t> memo;
    auto within = [&](auto&& self, int dim, int budget) -> std::size_t {
        if (budget < 0) return 0;
        if (dim == 0) return 1;
        const auto key = std::make_pair(dim, budget);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t total = 0;
        for (int x = -budget; x <= budget; ++x) total += self(self, dim - 1, budget - std::abs(x));
        return memo[key] = total;
    };
    return within(within, d, n) - (n > 0 ? within(within, d, n - 1) : 0);
}

// P{return after 2n steps} for simple random walk on Z^3, from the multinomial sum.
inline double z3_return(int n) {
    long double total = 0.0L;
    const long double lf2n = std::lgamma(2.0L * n + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) {
            const int k = n - i - j;
            const long double lg = lf2n - 2 * (std::lgamma(i + 1.0L) + std::lgamma(j + 1.0L) + std::lgamma(k + 1.0L));
            total += std::exp(lg - 2.0L * n * std::log(6.0L));
        }
    return static_cast<double>(total);
}

// Free reduction of a word over a..z / A..Z where upper case is the inverse.
inline std::string free_reduce(const std::string& w) {
    std::string out;
    for (char c : w) {
        if (!out.empty() && out.back() != c && std::tolower(out.back()) == std::tolower(c))
            out.pop_back();
        else
            out.push_back(c);
    }
    return out;
}

// Sphere sizes of Z/2 * Z/3 with generators a (order 2), b, B: alternating normal forms.
inline std::vector<std::size_t> z2_star_z3_spheres(int radius) {
    // ends_a[n], ends_b[n]: normal forms of length n ending in a / in a power of b
    std::vector<std::size_t> ends_a(radius + 1, 0), ends_b(radius + 1, 0), out(radius + 1, 0);
    out[0] = 1;
    for (int n = 1; n <= radius; ++n) {
        ends_a[n] = (n == 1 ? 1 : ends_b[n - 1]);
        // b or B appended after an a-syllable (or at the start)
        ends_b[n] = 2 * (n == 1 ? 1 : ends_a[n - 1]);
        out[n] = ends_a[n] + ends_b[n];
    }
    return out;
}

// Ball sizes of the lamplighter group over Z with generators t, T, a, by
// breadth-first search over (lamp set, position).
inline std::vector<std::size_t> lamplighter_spheres(int radius) {
    using State = std::pair<std::set<int>, int>;
    std::set<State> seen{{{}, 0}};
    std::vector<State> frontier{{{}, 0}};
    std::vector<std::size_t> out{1};
    for (int n = 1; n <= radius; ++n) {
        std::vector<State> next;
        for (const auto& [lamps, pos] : frontier) {
            std::vector<State> moves{{lamps, pos + 1}, {lamps, pos - 1}};
            auto toggled = lamps;
            if (!toggled.erase(pos)) toggled.insert(pos);
            moves.emplace_back(toggled, pos);
            for (auto& m : moves)
                if (seen.insert(m).second) next.push_back(m);
        }
        out.push_back(next.size());
        frontier.swap(next);
    }
    return out;
}

inline std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace oracle
