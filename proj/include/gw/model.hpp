#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gw {

// Deposition rates beta_v, indexed by the number v of strictly higher
// neighbors of a site. All components strictly positive.
struct RateTriple {
    double beta0 = 1.0;
    double beta1 = 1.0;
    double beta2 = 1.0;

    RateTriple() = default;
    RateTriple(double b0, double b1, double b2);  // rejects non-positive components

    double operator[](int v) const;  // v in {0,1,2}

    // beta0 <= beta1 <= beta2: the regime where the monotone couplings hold.
    bool monotone() const { return beta0 <= beta1 && beta1 <= beta2; }
    // Domain D: beta0 < beta2 < beta1.
    bool in_domain_d() const { return beta0 < beta2 && beta2 < beta1; }

    double min() const;
    double max() const;
    std::array<double, 3> sorted() const;  // ascending

    bool operator==(const RateTriple&) const = default;
};

// Convention for the virtual heights x(0) and x(n+1).
//   Zero:         x(0) = x(n+1) = 0
//   Periodic:     x(0) = x(n), x(n+1) = x(1)
//   Infinite:     x(0) = x(n+1) = +inf (always strictly higher)
//   ZeroInfinite: x(0) = 0, x(n+1) = +inf
enum class Boundary { Zero, Periodic, Infinite, ZeroInfinite };

Boundary parse_boundary(std::string_view name);  // zero|periodic|infinite|zero-infinite
std::string_view boundary_name(Boundary b);

// Pile heights of the crystal process. Heights only ever grow by unit
// deposits, so 64-bit counters cannot realistically overflow; debug builds
// assert it anyway.
struct Configuration {
    std::vector<std::uint64_t> heights;  // n >= 1 entries
    Boundary boundary = Boundary::Zero;

    Configuration() = default;
    Configuration(std::vector<std::uint64_t> h, Boundary b);  // rejects n = 0

    int n() const { return static_cast<int>(heights.size()); }

    bool operator==(const Configuration&) const = default;
};

Configuration flat_configuration(int n, Boundary b = Boundary::Zero,
                                 std::uint64_t level = 0);

// Consecutive height differences h_j = x(j) - x(j+1). Under Periodic the
// wraparound difference is kept too: n entries summing to zero, so V_j reads
// uniformly off the entries. Otherwise n-1 entries.
struct Shape {
    std::vector<std::int64_t> diffs;
    Boundary boundary = Boundary::Zero;

    int sites() const {
        return boundary == Boundary::Periodic ? static_cast<int>(diffs.size())
                                              : static_cast<int>(diffs.size()) + 1;
    }

    bool operator==(const Shape&) const = default;
};

// V_j: how many of the two neighbors of site j are strictly higher (0, 1, 2).
int neighbor_count(const Configuration& cfg, int j);  // j in 1..n
// Same statistic from the differences alone; agrees with the configuration
// form for every boundary convention (virtual-height comparisons reduce to
// difference signs, and the Zero indicators are identically false).
int neighbor_count(const Shape& h, int j);

// The jump rate of site j: beta indexed by V_j.
double transition_rate(const Configuration& cfg, const RateTriple& beta, int j);

// x + e_j.
Configuration deposit(const Configuration& cfg, int j);
void deposit_in_place(Configuration& cfg, int j);

Shape shape_of(const Configuration& cfg);
// h + f_j, the shape-process move matching a deposit at site j.
Shape shape_step(const Shape& h, int j);
void shape_step_in_place(Shape& h, int j);

// Heights reversed; only defined for reflection-symmetric boundaries
// (rejects ZeroInfinite).
Configuration reflect(const Configuration& cfg);

// Canonical text form, e.g. "zero:2,5,3".
Configuration parse_configuration(std::string_view text);
std::string format_configuration(const Configuration& cfg);

}  // namespace gw
