#pragma once

#include "gw/model.hpp"

#include <string_view>
#include <vector>

namespace gw {

// Two-site growth speed 2 b0 b1 / (b0 + b1); the two-site shape chain is
// ergodic exactly when beta1 > beta0, and the formula is rejected outside
// that regime.
double v2(double beta0, double beta1);

// Right-infinite two-site speed 2 b1 b2 / (b1 + b2); needs beta2 > beta1.
double v2_inf(double beta1, double beta2);

// Stationary law of the two-site height difference:
// mu(i) = ((b1-b0)/(b1+b0)) (b0/b1)^{|i|}; needs beta1 > beta0.
double mu_n2(double beta0, double beta1, long long i);

// The three families of admissible limiting speed vectors when beta2 < beta0.
enum class CombCase { E1, E2, E3 };

CombCase parse_comb_case(std::string_view name);  // e1|e2|e3
std::string_view comb_case_name(CombCase c);

// Every admissible speed vector of length n, deterministically ordered
// (blocks ascending, then pattern order), duplicates removed keeping the
// first occurrence. Preconditions: E1 needs beta2 < beta0 <= beta1, E2 needs
// beta2 < beta1 < beta0, E3 needs beta1 <= beta2 < beta0. Enumerations whose
// output would exceed ~8e6 numbers are rejected as a resource guard.
std::vector<std::vector<double>> enumerate_comb_set(int n, const RateTriple& beta,
                                                    CombCase c);

// Shape-process generator restricted to the box [-M, M]^{n-1} by dropping
// moves that leave it (taboo truncation: no invented transitions).
struct TruncatedChain {
    struct Arc {
        int to;       // target state index
        double rate;  // beta_{V_j(h)}
        int site;     // which deposit site j produced the move f_j
    };

    int n = 2;  // sites, 2 or 3
    RateTriple beta;
    int M = 2;
    int dim = 1;     // n - 1 shape coordinates
    int side = 5;    // 2M + 1
    int states = 5;  // side^dim

    std::vector<std::vector<Arc>> moves;  // outgoing arcs per state

    int index_of(const std::vector<int>& h) const;
    std::vector<int> state_of(int idx) const;
};

TruncatedChain build_truncated(int n, const RateTriple& beta, int M);

struct StationarySolve {
    std::vector<double> pi;       // >= 0, sums to 1
    double residual = 0.0;        // max |global balance| over all states
    double boundary_mass = 0.0;   // total pi on states with any |h_i| >= M-1
    std::vector<double> vhat;     // per-site throughput sum_h beta_{V_j(h)} pi(h)
    bool converged = false;       // residual <= tol and factorization succeeded
};

// Global-balance solve with the normalization row replacing the balance row
// of the origin state, sparse LU plus iterative refinement. boundary_mass is
// the truncation-quality certificate.
StationarySolve solve_stationary(const TruncatedChain& chain, double tol = 1e-10);

enum class VerdictLabel { ErgodicProved, TransientProved, CombTransient, Undecided };

std::string_view verdict_label_name(VerdictLabel l);

// Which proved statements decide the point (n, beta), plus the computed
// thresholds. Conditions (a)/(b)/(c) are only flagged inside their domain
// D = {beta0 < beta2 < beta1}; (a) and (b) are evaluated at the easiest
// admissible parameter m = max(2, n-2) (both thresholds increase with m and
// a statement at m covers all k <= m+2).
struct RegionVerdict {
    int n = 2;
    RateTriple beta;

    bool cond_prior = false;  // beta1, beta2 > (n-1)^2 beta0
    int m = 2;
    double thr_a = 0.0;  // m beta0
    double thr_b = 0.0;  // ((m-1) beta1 + beta0) / m
    double thr_c = 0.0;  // 4 sqrt(2) sqrt(beta1 beta0)
    bool cond_a = false;
    bool cond_b = false;
    bool cond_c = false;

    bool monotone = false;   // beta0 < beta1 <= beta2: ergodic for every n
    bool two_sites = false;  // n == 2 and beta1 > beta0
    bool h3 = false;         // n == 3 and beta1 > beta0 and beta2 > beta0

    int comb_case = 0;  // 0 none; 1: b2<b0<=b1, 2: b2<b1<b0, 3: b1<=b2<b0

    bool transience_applicable = false;  // n >= 5 and beta0 < beta2 < 2 beta0
    double transience_B = 0.0;           // NaN unless beta0 < beta2 < 2 beta0
    bool transience = false;             // applicable and beta1 > B

    VerdictLabel label = VerdictLabel::Undecided;
};

RegionVerdict region_verdict(int n, const RateTriple& beta);

// B(beta0, beta2) = max(b0 b2/(2b0-b2), 27 b0^2 b2/((3b0-b2)(b2-b0))),
// defined on beta0 < beta2 < 2 beta0.
double transience_B(double beta0, double beta2);

// 27 b0^2 b2 / (eps (b2 - b0)); needs beta2 > beta0 and 0 < eps < 3 beta0.
double vitesse_threshold(double beta0, double beta2, double eps);

}  // namespace gw
