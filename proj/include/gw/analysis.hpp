#pragma once

#include "gw/engine.hpp"
#include "gw/exact.hpp"
#include "gw/model.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gw {

struct SpeedEstimate {
    std::vector<double> speed;  // per-site endpoint estimate X_T(j)/T, averaged
    std::vector<double> se;     // standard error of each mean
    int replicas = 0;
    double horizon = 0.0;
    double max_gap_se = 0.0;  // max pairwise speed gap in combined-SE units
    std::uint64_t seed = 0;
};

SpeedEstimate estimate_speeds(const RateTriple& beta, const Configuration& cfg0,
                              double horizon, int replicas, std::uint64_t seed,
                              int threads = 1);

struct TailFit {
    int coordinate = 1;
    std::vector<int> k_grid;
    std::vector<double> horizons;
    // log_p[h][k] = log of the survival estimate P(|shape coordinate| >= k)
    // at horizons[h]; NaN where the estimate is zero
    std::vector<std::vector<double>> log_p;
    double alpha_hat = 0.0;  // pooled decay rate in k; > 0 means decaying
    double intercept = 0.0;
    double gof = 0.0;           // rms residual of the pooled fit
    bool slope_stable = false;  // per-horizon slopes agree pairwise within 3 SE
    bool tail_too_light = false;  // no horizon had 3 positive estimates to fit
    int replicas = 0;
    std::uint64_t seed = 0;
};

TailFit fit_tail(const RateTriple& beta, const Configuration& cfg0, int coordinate,
                 const std::vector<double>& horizons, const std::vector<int>& k_grid,
                 int replicas, std::uint64_t seed, int threads = 1);

struct CombMatch {
    std::vector<double> observed;
    std::vector<double> nearest;  // deviation-minimizing element, ties first-listed
    bool matched = false;         // deviation <= tol
    double deviation = 0.0;       // l-infinity distance to nearest
    CombCase searched = CombCase::E1;
    double tol = 0.0;
};

CombMatch classify_comb(const std::vector<double>& speeds, const RateTriple& beta,
                        CombCase c, double tol);

// Default per-coordinate tolerance 0.05 * max(beta), sized for endpoint
// speeds at horizons around 2000 where fluctuations are O(T^{-1/2}).
double default_comb_tol(const RateTriple& beta);

struct DtildeEstimate {
    int n = 1;
    double beta0 = 1.0;
    double beta1 = 1.0;
    std::vector<double> d_grid;
    std::vector<double> slope;     // decay-rate point estimate of -log P in t, per d
    std::vector<double> slope_lo;  // conservative lower confidence bound, per d
    double d_hat = 0.0;
    double bracket_lo = 0.0;  // grid interval bracketing the threshold
    double bracket_hi = 0.0;
    bool upper_endpoint = false;  // no grid point decayed; d_hat pinned to beta1
    int replicas = 0;
    std::uint64_t seed = 0;
};

DtildeEstimate estimate_dtilde(int n, double beta1, double beta0,
                               const std::vector<double>& d_grid,
                               const std::vector<double>& horizons, int replicas,
                               std::uint64_t seed, int threads = 1);

struct ShapeDistribution {
    std::map<std::vector<std::int64_t>, double> frequency;  // time-weighted
    double burn_in = 0.0;
    double horizon = 0.0;
    std::uint64_t events = 0;  // candidate events over the whole run
    bool converged = false;    // the two halves of the window agree in TV
    double half_tv = 0.0;
    std::uint64_t seed = 0;
};

ShapeDistribution empirical_shape_distribution(const RateTriple& beta,
                                               const Configuration& cfg0,
                                               double burn_in, double horizon,
                                               std::uint64_t seed);

}  // namespace gw
