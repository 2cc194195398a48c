#pragma once

#include "gw/exact.hpp"
#include "gw/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gw {

// Return/occupation statistics of the shape process over one trajectory.
// A "return" is an entry of H into the all-zero shape from a nonzero one;
// occupation is the time fraction spent in the box max_i |h_i| <= 5.
struct RecurrenceStats {
    int returns = 0;
    double last_return = 0.0;  // time of the latest return, 0 if none
    double occupation = 0.0;
};

// Piecewise-constant path: shapes[i] holds on [times[i], times[i+1]),
// the last shape holds to `horizon`. Requires times[0] == 0 and
// strictly increasing times bounded by horizon.
RecurrenceStats recurrence_statistics(const std::vector<std::vector<std::int64_t>>& shapes,
                                      const std::vector<double>& times, double horizon);

// Simulates one trajectory from cfg0 and scores it.
RecurrenceStats recurrence_statistics(const RateTriple& beta, const Configuration& cfg0,
                                      double horizon, std::uint64_t seed);

// Per-point estimator budget. Flags turn individual estimators off so a
// coarse pass over a large grid stays cheap.
struct SweepProtocol {
    double horizon = 200.0;
    int replicas = 8;
    bool run_recurrence = true;
    bool run_tail = true;
    bool run_speed = true;
};

// Grid description: beta0 is normalized to 1, the grids must be strictly
// increasing. Points are visited row-major with beta1 as the outer loop.
struct SweepSpec {
    int n = 2;
    std::vector<double> beta1;
    std::vector<double> beta2;
    SweepProtocol protocol;
    std::uint64_t seed = 0;
    std::string out;  // directory for sweep.csv + manifest; empty: no files
};

struct PointResult {
    int n = 0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    RegionVerdict verdict;
    std::optional<RecurrenceStats> recurrence;
    std::optional<double> alpha_hat;
    std::optional<double> speed_mean;
    double wall_seconds = 0.0;
    std::string status = "ok";
};

// Seed for one grid point, a pure function of the global seed and the
// point's coordinates so results do not depend on grid layout.
std::uint64_t sweep_point_seed(std::uint64_t global_seed, int n, double beta1, double beta2);

// One CSV row for a point, without trailing newline. Columns:
// n,beta1,beta2,verdict,cond_prior,cond_a,cond_b,cond_c,comb_case,
// transience_B,returns,last_return,occupation,alpha_hat,speed_mean,status
std::string sweep_csv_header();
std::string sweep_csv_row(const PointResult& p);

PointResult run_sweep_point(const SweepSpec& spec, double beta1, double beta2);

// Runs the whole grid. If out/sweep.csv already holds rows for some points
// they are reused verbatim, so re-running after an interruption yields a
// byte-identical final table. Returns results in grid order.
std::vector<PointResult> run_sweep(const SweepSpec& spec, int threads = 1);

}  // namespace gw
