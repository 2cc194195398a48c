#include "gw/exact.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace gw {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

double v2_formula(double a, double b) { return 2.0 * a * b / (a + b); }

double binom(int k, int d) {
    if (d < 0 || d > k) return 0.0;
    double r = 1.0;
    for (int i = 0; i < d; ++i) r = r * double(k - i) / double(i + 1);
    return r;
}

// Output-size guard shared by the three enumerations: the full set is
// materialized, so refuse anything beyond ~8e6 doubles (~64 MB).
void guard_output(double count, int n) {
    if (count * double(n) > 8e6)
        throw std::invalid_argument("comb set enumeration too large at n = " +
                                    std::to_string(n));
}

// Blocks of one single value or one doubled value, interleaved with a fixed
// separator; shared by the E1 and E3 grammars. The number of doubled blocks
// d is forced by the total length, patterns are emitted singles-first. With
// sep_trailing each block is followed by a separator (E3, whose leading
// separator lives in the prefix); otherwise separators sit between blocks.
void emit_blocks(int k, int d, double single, double dbl,
                 const std::vector<double>& prefix, double separator,
                 bool sep_trailing, const std::vector<double>& suffix,
                 std::vector<std::vector<double>>& out) {
    std::vector<int> pattern(static_cast<size_t>(k), 0);
    auto rec = [&](auto&& self, int block, int left) -> void {
        if (k - block < left) return;
        if (block == k) {
            if (left != 0) return;
            std::vector<double> row = prefix;
            for (int i = 0; i < k; ++i) {
                if (i > 0 && !sep_trailing) row.push_back(separator);
                if (pattern[static_cast<size_t>(i)]) {
                    row.push_back(dbl);
                    row.push_back(dbl);
                } else {
                    row.push_back(single);
                }
                if (sep_trailing) row.push_back(separator);
            }
            row.insert(row.end(), suffix.begin(), suffix.end());
            out.push_back(std::move(row));
            return;
        }
        pattern[static_cast<size_t>(block)] = 0;
        self(self, block + 1, left);
        if (left > 0) {
            pattern[static_cast<size_t>(block)] = 1;
            self(self, block + 1, left - 1);
            pattern[static_cast<size_t>(block)] = 0;
        }
    };
    rec(rec, 0, d);
}

std::vector<std::vector<double>> enumerate_e1(int n, const RateTriple& beta) {
    require(beta.beta2 < beta.beta0 && beta.beta0 <= beta.beta1,
            "case e1 needs beta2 < beta0 <= beta1");
    double count = 0.0;
    for (int k = 1; k <= n; ++k) count += binom(k, n + 1 - 2 * k);
    guard_output(count, n);

    const double v = v2_formula(beta.beta0, beta.beta1);
    std::vector<std::vector<double>> out;
    std::vector<double> empty;
    for (int k = 1; k <= n; ++k) {
        int d = n + 1 - 2 * k;
        if (d < 0) break;
        if (d > k) continue;
        emit_blocks(k, d, beta.beta0, v, empty, beta.beta2,
                    /*sep_trailing=*/false, empty, out);
    }
    return out;
}

std::vector<std::vector<double>> enumerate_e2(int n, const RateTriple& beta) {
    require(beta.beta2 < beta.beta1 && beta.beta1 < beta.beta0,
            "case e2 needs beta2 < beta1 < beta0");
    const int l = n - 1;
    double count = (4.0 * std::pow(2.0, l) + 2.0 * (l % 2 == 0 ? 1.0 : -1.0)) / 3.0;
    guard_output(count, n);

    const double value[3] = {beta.beta0, beta.beta1, beta.beta2};
    std::vector<std::vector<double>> out;
    std::vector<int> seq(static_cast<size_t>(n), 0);
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == n) {
            std::vector<double> row(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) row[static_cast<size_t>(i)] = value[seq[static_cast<size_t>(i)]];
            out.push_back(std::move(row));
            return;
        }
        for (int v = 0; v < 3; ++v) {
            if (pos > 0 && seq[static_cast<size_t>(pos - 1)] == v) continue;
            if (v == 2 && (pos == 0 || pos == n - 1)) continue;
            seq[static_cast<size_t>(pos)] = v;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<std::vector<double>> enumerate_e3(int n, const RateTriple& beta) {
    require(beta.beta1 <= beta.beta2 && beta.beta2 < beta.beta0,
            "case e3 needs beta1 <= beta2 < beta0");
    double count = 0.0;
    for (int el = 0; el <= 1; ++el)
        for (int er = 0; er <= 1; ++er)
            for (int k = 0; 2 * k <= n; ++k) count += binom(k, n - 1 - el - er - 2 * k);
    guard_output(count, n);

    const double w = v2_formula(beta.beta1, beta.beta2);
    std::vector<std::vector<double>> out;
    for (int k = 0; 2 * k <= n; ++k) {
        for (int el = 0; el <= 1; ++el) {
            for (int er = 0; er <= 1; ++er) {
                int d = n - 1 - el - er - 2 * k;
                if (d < 0 || d > k) continue;
                std::vector<double> prefix, suffix;
                if (el) prefix.push_back(beta.beta1);
                prefix.push_back(beta.beta0);
                if (er) suffix.push_back(beta.beta1);
                if (k == 0) {
                    std::vector<double> row = prefix;
                    row.insert(row.end(), suffix.begin(), suffix.end());
                    out.push_back(std::move(row));
                } else {
                    emit_blocks(k, d, beta.beta2, w, prefix, beta.beta0,
                                /*sep_trailing=*/true, suffix, out);
                }
            }
        }
    }
    return out;
}

}  // namespace

double v2(double beta0, double beta1) {
    require(beta0 > 0.0 && beta1 > 0.0, "rates must be positive");
    require(beta1 > beta0, "v2 defined only in the ergodic regime beta1 > beta0");
    return v2_formula(beta0, beta1);
}

double v2_inf(double beta1, double beta2) {
    require(beta1 > 0.0 && beta2 > 0.0, "rates must be positive");
    require(beta2 > beta1, "v2_inf defined only in the ergodic regime beta2 > beta1");
    return v2_formula(beta1, beta2);
}

double mu_n2(double beta0, double beta1, long long i) {
    require(beta0 > 0.0 && beta1 > 0.0, "rates must be positive");
    require(beta1 > beta0, "mu_n2 defined only in the ergodic regime beta1 > beta0");
    double mass = (beta1 - beta0) / (beta1 + beta0);
    return mass * std::pow(beta0 / beta1, double(i < 0 ? -i : i));
}

CombCase parse_comb_case(std::string_view name) {
    if (name == "e1" || name == "E1") return CombCase::E1;
    if (name == "e2" || name == "E2") return CombCase::E2;
    if (name == "e3" || name == "E3") return CombCase::E3;
    throw std::invalid_argument("unknown comb case: " + std::string(name));
}

std::string_view comb_case_name(CombCase c) {
    switch (c) {
        case CombCase::E1: return "e1";
        case CombCase::E2: return "e2";
        case CombCase::E3: return "e3";
    }
    throw std::logic_error("bad comb case");
}

std::vector<std::vector<double>> enumerate_comb_set(int n, const RateTriple& beta,
                                                    CombCase c) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    std::vector<std::vector<double>> raw;
    switch (c) {
        case CombCase::E1: raw = enumerate_e1(n, beta); break;
        case CombCase::E2: raw = enumerate_e2(n, beta); break;
        case CombCase::E3: raw = enumerate_e3(n, beta); break;
    }
    std::vector<std::vector<double>> out;
    std::set<std::vector<double>> seen;
    for (auto& row : raw)
        if (seen.insert(row).second) out.push_back(std::move(row));
    return out;
}

int TruncatedChain::index_of(const std::vector<int>& h) const {
    int idx = 0;
    for (int c = 0; c < dim; ++c) {
        int v = h[static_cast<size_t>(c)];
        if (v < -M || v > M) return -1;
        idx = idx * side + (v + M);
    }
    return idx;
}

std::vector<int> TruncatedChain::state_of(int idx) const {
    std::vector<int> h(static_cast<size_t>(dim));
    for (int c = dim - 1; c >= 0; --c) {
        h[static_cast<size_t>(c)] = idx % side - M;
        idx /= side;
    }
    return h;
}

TruncatedChain build_truncated(int n, const RateTriple& beta, int M) {
    if (n != 2 && n != 3) throw std::invalid_argument("truncated solver supports n = 2 or 3");
    if (M < 2) throw std::invalid_argument("truncation M must be at least 2");

    TruncatedChain chain;
    chain.n = n;
    chain.beta = beta;
    chain.M = M;
    chain.dim = n - 1;
    chain.side = 2 * M + 1;
    chain.states = 1;
    for (int c = 0; c < chain.dim; ++c) chain.states *= chain.side;
    chain.moves.resize(static_cast<size_t>(chain.states));

    Shape s{std::vector<std::int64_t>(static_cast<size_t>(chain.dim), 0), Boundary::Zero};
    for (int idx = 0; idx < chain.states; ++idx) {
        std::vector<int> h = chain.state_of(idx);
        for (int c = 0; c < chain.dim; ++c) s.diffs[static_cast<size_t>(c)] = h[static_cast<size_t>(c)];
        for (int j = 1; j <= n; ++j) {
            double rate = beta[neighbor_count(s, j)];
            Shape t = shape_step(s, j);
            std::vector<int> g(static_cast<size_t>(chain.dim));
            for (int c = 0; c < chain.dim; ++c) g[static_cast<size_t>(c)] = int(t.diffs[static_cast<size_t>(c)]);
            int to = chain.index_of(g);
            if (to < 0) continue;  // taboo truncation: the move is dropped
            chain.moves[static_cast<size_t>(idx)].push_back({to, rate, j});
        }
    }
    return chain;
}

StationarySolve solve_stationary(const TruncatedChain& chain, double tol) {
    const int ns = chain.states;
    StationarySolve res;

    // Balance system Q^T pi = 0 with the origin row replaced by the
    // normalization sum(pi) = 1.
    const int r0 = chain.index_of(std::vector<int>(static_cast<size_t>(chain.dim), 0));
    std::vector<Eigen::Triplet<double>> trips;
    for (int s = 0; s < ns; ++s) {
        double out_rate = 0.0;
        for (const auto& a : chain.moves[static_cast<size_t>(s)]) {
            out_rate += a.rate;
            if (a.to != r0) trips.emplace_back(a.to, s, a.rate);
        }
        if (s != r0) trips.emplace_back(s, s, -out_rate);
    }
    for (int s = 0; s < ns; ++s) trips.emplace_back(r0, s, 1.0);

    Eigen::SparseMatrix<double> B(ns, ns);
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
    rhs(r0) = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(B);
    lu.factorize(B);
    if (lu.info() != Eigen::Success) {
        res.residual = std::numeric_limits<double>::infinity();
        res.converged = false;
        return res;
    }

    Eigen::VectorXd x = lu.solve(rhs);
    for (int it = 0; it < 20; ++it) {
        Eigen::VectorXd r = rhs - B * x;
        if (r.lpNorm<Eigen::Infinity>() <= 1e-16) break;
        x += lu.solve(r);
    }

    bool large_negative = x.minCoeff() < -1e-8;
    res.pi.assign(static_cast<size_t>(ns), 0.0);
    double total = 0.0;
    for (int s = 0; s < ns; ++s) {
        double v = std::max(x(s), 0.0);
        res.pi[static_cast<size_t>(s)] = v;
        total += v;
    }
    for (auto& v : res.pi) v /= total;

    // True global balance of the reported vector, replaced row included.
    std::vector<double> bal(static_cast<size_t>(ns), 0.0);
    for (int s = 0; s < ns; ++s) {
        for (const auto& a : chain.moves[static_cast<size_t>(s)]) {
            double flow = res.pi[static_cast<size_t>(s)] * a.rate;
            bal[static_cast<size_t>(s)] -= flow;
            bal[static_cast<size_t>(a.to)] += flow;
        }
    }
    res.residual = 0.0;
    for (double b : bal) res.residual = std::max(res.residual, std::abs(b));

    res.boundary_mass = 0.0;
    res.vhat.assign(static_cast<size_t>(chain.n), 0.0);
    Shape s{std::vector<std::int64_t>(static_cast<size_t>(chain.dim), 0), Boundary::Zero};
    for (int idx = 0; idx < ns; ++idx) {
        std::vector<int> h = chain.state_of(idx);
        bool edge = false;
        for (int c = 0; c < chain.dim; ++c) {
            s.diffs[static_cast<size_t>(c)] = h[static_cast<size_t>(c)];
            if (std::abs(h[static_cast<size_t>(c)]) >= chain.M - 1) edge = true;
        }
        if (edge) res.boundary_mass += res.pi[static_cast<size_t>(idx)];
        for (int j = 1; j <= chain.n; ++j)
            res.vhat[static_cast<size_t>(j - 1)] +=
                chain.beta[neighbor_count(s, j)] * res.pi[static_cast<size_t>(idx)];
    }

    res.converged = !large_negative && res.residual <= tol;
    return res;
}

std::string_view verdict_label_name(VerdictLabel l) {
    switch (l) {
        case VerdictLabel::ErgodicProved: return "ergodic-proved";
        case VerdictLabel::TransientProved: return "transient-proved";
        case VerdictLabel::CombTransient: return "comb-transient";
        case VerdictLabel::Undecided: return "undecided";
    }
    throw std::logic_error("bad verdict label");
}

double transience_B(double beta0, double beta2) {
    require(beta0 > 0.0, "rates must be positive");
    require(beta0 < beta2 && beta2 < 2.0 * beta0,
            "B defined on the strip beta0 < beta2 < 2 beta0");
    double first = beta0 * beta2 / (2.0 * beta0 - beta2);
    double second = 27.0 * beta0 * beta0 * beta2 /
                    ((3.0 * beta0 - beta2) * (beta2 - beta0));
    return std::max(first, second);
}

double vitesse_threshold(double beta0, double beta2, double eps) {
    require(beta0 > 0.0 && beta2 > 0.0, "rates must be positive");
    require(beta2 > beta0, "threshold needs beta2 > beta0");
    require(eps > 0.0 && eps < 3.0 * beta0, "threshold needs 0 < eps < 3 beta0");
    return 27.0 * beta0 * beta0 * beta2 / (eps * (beta2 - beta0));
}

RegionVerdict region_verdict(int n, const RateTriple& beta) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");

    RegionVerdict v;
    v.n = n;
    v.beta = beta;
    const double b0 = beta.beta0, b1 = beta.beta1, b2 = beta.beta2;

    double prior_thr = double(n - 1) * double(n - 1) * b0;
    v.cond_prior = b1 > prior_thr && b2 > prior_thr;

    v.m = std::max(2, n - 2);
    v.thr_a = double(v.m) * b0;
    v.thr_b = (double(v.m - 1) * b1 + b0) / double(v.m);
    v.thr_c = 4.0 * std::sqrt(2.0) * std::sqrt(b1 * b0);
    bool in_d = b0 < b2 && b2 < b1;
    v.cond_a = in_d && b2 > v.thr_a;
    v.cond_b = in_d && b2 > v.thr_b;
    v.cond_c = in_d && b2 > v.thr_c;

    v.monotone = b0 < b1 && b1 <= b2;
    v.two_sites = n == 2 && b1 > b0;
    v.h3 = n == 3 && b1 > b0 && b2 > b0;

    if (b2 < b0) {
        if (b0 <= b1) v.comb_case = 1;
        else if (b2 < b1) v.comb_case = 2;
        else v.comb_case = 3;
    }

    v.transience_applicable = n >= 5 && b0 < b2 && b2 < 2.0 * b0;
    v.transience_B = (b0 < b2 && b2 < 2.0 * b0)
                         ? transience_B(b0, b2)
                         : std::numeric_limits<double>::quiet_NaN();
    v.transience = v.transience_applicable && b1 > v.transience_B;

    bool ergodic = v.monotone || v.two_sites || v.h3 || v.cond_prior || v.cond_a ||
                   v.cond_b || v.cond_c;
    if (ergodic) {
        v.label = VerdictLabel::ErgodicProved;
    } else if (v.comb_case != 0 && (n >= 3 || b1 < b0)) {
        // n = 2 with beta0 <= beta1 is decided by the two-site statement
        // alone; the comb flag stays informational there.
        v.label = VerdictLabel::CombTransient;
    } else if (v.transience) {
        v.label = VerdictLabel::TransientProved;
    } else {
        v.label = VerdictLabel::Undecided;
    }
    return v;
}

}  // namespace gw
