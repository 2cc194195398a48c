#include "gw/model.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace gw {

RateTriple::RateTriple(double b0, double b1, double b2)
    : beta0(b0), beta1(b1), beta2(b2) {
    if (!(b0 > 0.0) || !(b1 > 0.0) || !(b2 > 0.0))
        throw std::invalid_argument("RateTriple: all components must be > 0");
}

double RateTriple::operator[](int v) const {
    switch (v) {
        case 0: return beta0;
        case 1: return beta1;
        case 2: return beta2;
        default: throw std::out_of_range("RateTriple: index must be 0, 1 or 2");
    }
}

double RateTriple::min() const { return std::min({beta0, beta1, beta2}); }
double RateTriple::max() const { return std::max({beta0, beta1, beta2}); }

std::array<double, 3> RateTriple::sorted() const {
    std::array<double, 3> b{beta0, beta1, beta2};
    std::sort(b.begin(), b.end());
    return b;
}

Boundary parse_boundary(std::string_view name) {
    if (name == "zero") return Boundary::Zero;
    if (name == "periodic") return Boundary::Periodic;
    if (name == "infinite") return Boundary::Infinite;
    if (name == "zero-infinite") return Boundary::ZeroInfinite;
    throw std::invalid_argument("unknown boundary '" + std::string(name) +
                                "' (expected zero|periodic|infinite|zero-infinite)");
}

std::string_view boundary_name(Boundary b) {
    switch (b) {
        case Boundary::Zero: return "zero";
        case Boundary::Periodic: return "periodic";
        case Boundary::Infinite: return "infinite";
        case Boundary::ZeroInfinite: return "zero-infinite";
    }
    throw std::logic_error("boundary_name: bad enum value");
}

Configuration::Configuration(std::vector<std::uint64_t> h, Boundary b)
    : heights(std::move(h)), boundary(b) {
    if (heights.empty())
        throw std::invalid_argument("Configuration: needs at least one site");
}

Configuration flat_configuration(int n, Boundary b, std::uint64_t level) {
    if (n < 1) throw std::invalid_argument("flat_configuration: n must be >= 1");
    return Configuration(std::vector<std::uint64_t>(static_cast<size_t>(n), level), b);
}

namespace {

void check_site(int n, int j) {
    if (j < 1 || j > n) throw std::out_of_range("site index out of range");
}

// Virtual height beside site 1 (left=true) or site n. The bool result is
// "virtual neighbor strictly higher than height x".
bool virtual_higher(const Configuration& cfg, bool left, std::uint64_t x) {
    switch (cfg.boundary) {
        case Boundary::Zero: return false;  // height 0 is never strictly higher
        case Boundary::Infinite: return true;
        case Boundary::ZeroInfinite: return !left;
        case Boundary::Periodic:
            return (left ? cfg.heights.back() : cfg.heights.front()) > x;
    }
    throw std::logic_error("virtual_higher: bad enum value");
}

}  // namespace

int neighbor_count(const Configuration& cfg, int j) {
    const int n = cfg.n();
    check_site(n, j);
    const std::uint64_t x = cfg.heights[static_cast<size_t>(j - 1)];
    const bool left = (j == 1) ? virtual_higher(cfg, true, x)
                               : cfg.heights[static_cast<size_t>(j - 2)] > x;
    const bool right = (j == n) ? virtual_higher(cfg, false, x)
                                : cfg.heights[static_cast<size_t>(j)] > x;
    return int(left) + int(right);
}

int neighbor_count(const Shape& h, int j) {
    const int n = h.sites();
    check_site(n, j);
    if (h.boundary == Boundary::Periodic) {
        // diffs[i] = x(i+1) - x(i+2 cyclic); left neighbor of j is higher iff
        // h_{j-1} > 0 (cyclically), right iff h_j < 0.
        const auto& d = h.diffs;
        const std::int64_t left = d[static_cast<size_t>((j + n - 2) % n)];
        const std::int64_t right = d[static_cast<size_t>(j - 1)];
        return int(left > 0) + int(right < 0);
    }
    bool left, right;
    if (j == 1)
        left = h.boundary == Boundary::Infinite;  // Zero and ZeroInfinite: never
    else
        left = h.diffs[static_cast<size_t>(j - 2)] > 0;
    if (j == n)
        right = h.boundary != Boundary::Zero;  // Infinite and ZeroInfinite: always
    else
        right = h.diffs[static_cast<size_t>(j - 1)] < 0;
    return int(left) + int(right);
}

double transition_rate(const Configuration& cfg, const RateTriple& beta, int j) {
    return beta[neighbor_count(cfg, j)];
}

void deposit_in_place(Configuration& cfg, int j) {
    check_site(cfg.n(), j);
    assert(cfg.heights[static_cast<size_t>(j - 1)] !=
           std::numeric_limits<std::uint64_t>::max());
    ++cfg.heights[static_cast<size_t>(j - 1)];
}

Configuration deposit(const Configuration& cfg, int j) {
    Configuration out = cfg;
    deposit_in_place(out, j);
    return out;
}

Shape shape_of(const Configuration& cfg) {
    const int n = cfg.n();
    Shape h;
    h.boundary = cfg.boundary;
    if (cfg.boundary == Boundary::Periodic) {
        h.diffs.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            h.diffs[static_cast<size_t>(i)] =
                static_cast<std::int64_t>(cfg.heights[static_cast<size_t>(i)]) -
                static_cast<std::int64_t>(cfg.heights[static_cast<size_t>((i + 1) % n)]);
    } else {
        h.diffs.resize(static_cast<size_t>(n - 1));
        for (int i = 0; i + 1 < n; ++i)
            h.diffs[static_cast<size_t>(i)] =
                static_cast<std::int64_t>(cfg.heights[static_cast<size_t>(i)]) -
                static_cast<std::int64_t>(cfg.heights[static_cast<size_t>(i + 1)]);
    }
    return h;
}

void shape_step_in_place(Shape& h, int j) {
    const int n = h.sites();
    check_site(n, j);
    auto& d = h.diffs;
    if (h.boundary == Boundary::Periodic) {
        // f_j = e_j - e_{j-1 cyclic}; a no-op when n = 1.
        ++d[static_cast<size_t>(j - 1)];
        --d[static_cast<size_t>((j + n - 2) % n)];
        return;
    }
    // f_1 = e_1, f_j = e_j - e_{j-1} for 1 < j < n, f_n = -e_{n-1}.
    if (j < n) ++d[static_cast<size_t>(j - 1)];
    if (j > 1) --d[static_cast<size_t>(j - 2)];
}

Shape shape_step(const Shape& h, int j) {
    Shape out = h;
    shape_step_in_place(out, j);
    return out;
}

Configuration reflect(const Configuration& cfg) {
    if (cfg.boundary == Boundary::ZeroInfinite)
        throw std::invalid_argument(
            "reflect: zero-infinite boundary is not reflection-symmetric");
    Configuration out = cfg;
    std::reverse(out.heights.begin(), out.heights.end());
    return out;
}

Configuration parse_configuration(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument(
            "configuration must look like 'zero:2,5,3' (missing ':')");
    const Boundary b = parse_boundary(text.substr(0, colon));
    std::string_view rest = text.substr(colon + 1);
    std::vector<std::uint64_t> heights;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view tok =
            comma == std::string_view::npos ? rest : rest.substr(0, comma);
        std::uint64_t value = 0;
        const auto [ptr, ec] =
            std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw std::invalid_argument("bad height '" + std::string(tok) +
                                        "' (heights are nonnegative integers)");
        heights.push_back(value);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return Configuration(std::move(heights), b);
}

std::string format_configuration(const Configuration& cfg) {
    std::string out{boundary_name(cfg.boundary)};
    out += ':';
    for (int i = 0; i < cfg.n(); ++i) {
        if (i) out += ',';
        out += std::to_string(cfg.heights[static_cast<size_t>(i)]);
    }
    return out;
}

}  // namespace gw
