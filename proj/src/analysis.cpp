#include "gw/analysis.hpp"

#include "gw/parallel.hpp"
#include "gw/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gw {

namespace {

constexpr double wilson_z = 2.5758;  // two-sided 99% normal quantile

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

Interval wilson(long long count, long long total, double z) {
    double n = double(total);
    double p = double(count) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void check_horizons(const std::vector<double>& horizons, size_t at_least) {
    if (horizons.size() < at_least)
        throw std::invalid_argument("need at least " + std::to_string(at_least) +
                                    " horizons");
    double prev = 0.0;
    for (double t : horizons) {
        if (!(t > prev)) throw std::invalid_argument("horizons must be positive and ascending");
        prev = t;
    }
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_var = 0.0;
    bool ok = false;
};

// Unweighted least squares with the slope variance propagated from
// per-point variances.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& var) {
    LineFit f;
    size_t m = x.size();
    if (m < 2) return f;
    double xbar = 0.0, ybar = 0.0;
    for (size_t i = 0; i < m; ++i) {
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= double(m);
    ybar /= double(m);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx <= 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = ybar - f.slope * xbar;
    for (size_t i = 0; i < m; ++i) {
        double c = (x[i] - xbar) / sxx;
        f.slope_var += c * c * var[i];
    }
    f.ok = true;
    return f;
}

}  // namespace

SpeedEstimate estimate_speeds(const RateTriple& beta, const Configuration& cfg0,
                              double horizon, int replicas, std::uint64_t seed,
                              int threads) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");

    const int n = cfg0.n();
    std::vector<std::vector<double>> slot(static_cast<size_t>(replicas));
    parallel_for(replicas, threads, [&](int r) {
        PoissonSimulator sim(beta, cfg0, derive_seed(seed, static_cast<std::uint64_t>(r)));
        while (sim.step(horizon)) {
        }
        std::vector<double> v(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            v[static_cast<size_t>(j)] =
                double(sim.state().heights[static_cast<size_t>(j)] -
                       cfg0.heights[static_cast<size_t>(j)]) /
                horizon;
        slot[static_cast<size_t>(r)] = std::move(v);
    });

    SpeedEstimate est;
    est.replicas = replicas;
    est.horizon = horizon;
    est.seed = seed;
    est.speed.assign(static_cast<size_t>(n), 0.0);
    est.se.assign(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double mean = 0.0;
        for (auto& v : slot) mean += v[static_cast<size_t>(j)];
        mean /= double(replicas);
        double ss = 0.0;
        for (auto& v : slot) {
            double d = v[static_cast<size_t>(j)] - mean;
            ss += d * d;
        }
        est.speed[static_cast<size_t>(j)] = mean;
        est.se[static_cast<size_t>(j)] =
            std::sqrt(ss / double(replicas - 1) / double(replicas));
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            double gap = std::abs(est.speed[static_cast<size_t>(a)] -
                                  est.speed[static_cast<size_t>(b)]);
            double se = std::sqrt(est.se[static_cast<size_t>(a)] * est.se[static_cast<size_t>(a)] +
                                  est.se[static_cast<size_t>(b)] * est.se[static_cast<size_t>(b)]);
            est.max_gap_se = std::max(est.max_gap_se, se > 0.0 ? gap / se : 0.0);
        }
    }
    return est;
}

TailFit fit_tail(const RateTriple& beta, const Configuration& cfg0, int coordinate,
                 const std::vector<double>& horizons, const std::vector<int>& k_grid,
                 int replicas, std::uint64_t seed, int threads) {
    const int n = cfg0.n();
    if (coordinate < 1 || coordinate > n - 1)
        throw std::invalid_argument("shape coordinate out of range");
    check_horizons(horizons, 2);
    if (k_grid.size() < 3) throw std::invalid_argument("need at least 3 k values");
    int prev_k = 0;
    for (int k : k_grid) {
        if (k <= prev_k) throw std::invalid_argument("k grid must be positive and ascending");
        prev_k = k;
    }
    if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");

    const size_t nh = horizons.size(), nk = k_grid.size();
    std::vector<std::atomic<long long>> count(nh * nk);  // integer sums: order-free
    parallel_for(replicas, threads, [&](int r) {
        auto traj = run_poisson(beta, cfg0, horizons.back(), horizons,
                                derive_seed(seed, static_cast<std::uint64_t>(r)));
        for (size_t h = 0; h < nh; ++h) {
            const auto& x = traj.snapshots[h];
            long long diff = static_cast<long long>(x[static_cast<size_t>(coordinate - 1)]) -
                             static_cast<long long>(x[static_cast<size_t>(coordinate)]);
            long long mag = diff < 0 ? -diff : diff;
            for (size_t k = 0; k < nk; ++k)
                if (mag >= k_grid[k]) count[h * nk + k].fetch_add(1, std::memory_order_relaxed);
        }
    });

    TailFit fit;
    fit.coordinate = coordinate;
    fit.k_grid = k_grid;
    fit.horizons = horizons;
    fit.replicas = replicas;
    fit.seed = seed;
    fit.log_p.assign(nh, std::vector<double>(nk, std::numeric_limits<double>::quiet_NaN()));

    std::vector<LineFit> lines;
    std::vector<size_t> fitted_h;
    for (size_t h = 0; h < nh; ++h) {
        std::vector<double> xs, ys, vars;
        for (size_t k = 0; k < nk; ++k) {
            long long c = count[h * nk + k].load();
            if (c == 0) continue;
            double p = double(c) / double(replicas);
            fit.log_p[h][k] = std::log(p);
            xs.push_back(double(k_grid[k]));
            ys.push_back(fit.log_p[h][k]);
            vars.push_back(std::max((1.0 - p) / double(c), 1e-12));
        }
        if (xs.size() < 3) continue;
        LineFit lf = fit_line(xs, ys, vars);
        if (!lf.ok) continue;
        lines.push_back(lf);
        fitted_h.push_back(h);
    }

    if (lines.empty()) {
        fit.tail_too_light = true;
        return fit;
    }

    double wsum = 0.0, slope = 0.0, intercept = 0.0;
    for (auto& lf : lines) {
        double w = 1.0 / std::max(lf.slope_var, 1e-12);
        wsum += w;
        slope += w * lf.slope;
        intercept += w * lf.intercept;
    }
    slope /= wsum;
    intercept /= wsum;
    fit.alpha_hat = -slope;
    fit.intercept = intercept;

    fit.slope_stable = true;
    for (size_t a = 0; a < lines.size(); ++a)
        for (size_t b = a + 1; b < lines.size(); ++b)
            if (std::abs(lines[a].slope - lines[b].slope) >
                3.0 * std::sqrt(lines[a].slope_var + lines[b].slope_var))
                fit.slope_stable = false;

    double ss = 0.0;
    size_t pts = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
        size_t h = fitted_h[i];
        for (size_t k = 0; k < nk; ++k) {
            double y = fit.log_p[h][k];
            if (std::isnan(y)) continue;
            double r = y - (lines[i].intercept + slope * double(k_grid[k]));
            ss += r * r;
            ++pts;
        }
    }
    fit.gof = pts ? std::sqrt(ss / double(pts)) : 0.0;
    return fit;
}

double default_comb_tol(const RateTriple& beta) { return 0.05 * beta.max(); }

CombMatch classify_comb(const std::vector<double>& speeds, const RateTriple& beta,
                        CombCase c, double tol) {
    if (speeds.empty()) throw std::invalid_argument("empty speed vector");
    if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
    auto candidates = enumerate_comb_set(int(speeds.size()), beta, c);
    if (candidates.empty()) throw std::logic_error("comb set unexpectedly empty");

    CombMatch m;
    m.observed = speeds;
    m.searched = c;
    m.tol = tol;
    m.deviation = std::numeric_limits<double>::infinity();
    for (auto& cand : candidates) {
        double dev = 0.0;
        for (size_t i = 0; i < cand.size(); ++i)
            dev = std::max(dev, std::abs(cand[i] - speeds[i]));
        if (dev < m.deviation) {  // strict: ties keep the first-enumerated
            m.deviation = dev;
            m.nearest = cand;
        }
    }
    m.matched = m.deviation <= tol;
    return m;
}

DtildeEstimate estimate_dtilde(int n, double beta1, double beta0,
                               const std::vector<double>& d_grid,
                               const std::vector<double>& horizons, int replicas,
                               std::uint64_t seed, int threads) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (!(beta0 > 0.0) || !(beta1 >= beta0))
        throw std::invalid_argument("need 0 < beta0 <= beta1");
    if (d_grid.empty()) throw std::invalid_argument("empty d grid");
    double prev = -std::numeric_limits<double>::infinity();
    for (double d : d_grid) {
        if (!(d > prev)) throw std::invalid_argument("d grid must be ascending");
        prev = d;
    }
    check_horizons(horizons, 3);
    if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");

    const RateTriple aux(beta0, beta1, beta1);  // auxiliary process rates
    const Configuration cfg0 = flat_configuration(n, Boundary::Zero);
    const size_t nh = horizons.size();

    // right-edge heights, one sample row per horizon
    std::vector<std::vector<std::uint64_t>> sample(nh);
    for (auto& row : sample) row.assign(static_cast<size_t>(replicas), 0);
    parallel_for(int(nh) * replicas, threads, [&](int task) {
        size_t h = static_cast<size_t>(task) / static_cast<size_t>(replicas);
        int r = task % replicas;
        PoissonSimulator sim(aux, cfg0,
                             derive_seed(seed, h + 1, static_cast<std::uint64_t>(r)));
        while (sim.step(horizons[h])) {
        }
        sample[h][static_cast<size_t>(r)] = sim.state().heights[static_cast<size_t>(n - 1)];
    });

    DtildeEstimate est;
    est.n = n;
    est.beta0 = beta0;
    est.beta1 = beta1;
    est.d_grid = d_grid;
    est.replicas = replicas;
    est.seed = seed;

    // OLS coefficients of t against the horizon grid
    double tbar = 0.0;
    for (double t : horizons) tbar += t;
    tbar /= double(nh);
    double sxx = 0.0;
    for (double t : horizons) sxx += (t - tbar) * (t - tbar);

    for (double d : d_grid) {
        double slope_pt = 0.0, slope_lo = 0.0;
        for (size_t h = 0; h < nh; ++h) {
            long long c = 0;
            for (std::uint64_t x : sample[h])
                if (double(x) >= d * horizons[h]) ++c;
            double coef = (horizons[h] - tbar) / sxx;
            if (coef == 0.0) continue;
            double p_pt = std::max(double(c), 0.5) / double(replicas);
            slope_pt += coef * (-std::log(p_pt));
            Interval iv = wilson(c, replicas, wilson_z);
            // adversarial endpoint: the smallest slope consistent with the bands
            double y = coef > 0.0 ? -std::log(iv.hi)
                                  : (iv.lo > 0.0 ? -std::log(iv.lo)
                                                 : std::numeric_limits<double>::infinity());
            if (std::isinf(y))
                slope_lo = -std::numeric_limits<double>::infinity();
            else if (!std::isinf(slope_lo))
                slope_lo += coef * y;
        }
        est.slope.push_back(slope_pt);
        est.slope_lo.push_back(slope_lo);
    }

    auto clamp = [&](double x) { return std::min(std::max(x, beta0), beta1); };
    int found = -1;
    for (size_t i = 0; i < d_grid.size(); ++i) {
        if (est.slope_lo[i] > 0.0) {
            found = int(i);
            break;
        }
    }
    if (found < 0) {
        est.d_hat = beta1;
        est.bracket_lo = clamp(d_grid.back());
        est.bracket_hi = beta1;
        est.upper_endpoint = true;
    } else {
        est.d_hat = clamp(d_grid[static_cast<size_t>(found)]);
        est.bracket_hi = est.d_hat;
        est.bracket_lo = found > 0 ? clamp(d_grid[static_cast<size_t>(found - 1)]) : beta0;
    }
    return est;
}

ShapeDistribution empirical_shape_distribution(const RateTriple& beta,
                                               const Configuration& cfg0,
                                               double burn_in, double horizon,
                                               std::uint64_t seed) {
    if (!(horizon > 0.0) || burn_in < 0.0 || !(burn_in < horizon))
        throw std::invalid_argument("need 0 <= burn_in < horizon");

    PoissonSimulator sim(beta, cfg0, seed);
    Shape cur = shape_of(cfg0);
    const double mid = 0.5 * (burn_in + horizon);

    std::map<std::vector<std::int64_t>, double> w1, w2;
    auto credit = [&](double a, double b) {
        double lo1 = std::max(a, burn_in), hi1 = std::min(b, mid);
        if (hi1 > lo1) w1[cur.diffs] += hi1 - lo1;
        double lo2 = std::max(a, mid), hi2 = std::min(b, horizon);
        if (hi2 > lo2) w2[cur.diffs] += hi2 - lo2;
    };

    double prev = 0.0;
    Event ev;
    while (sim.step(horizon, &ev)) {
        credit(prev, ev.time);
        prev = ev.time;
        if (ev.accepted) shape_step_in_place(cur, ev.site);
    }
    credit(prev, horizon);

    ShapeDistribution dist;
    dist.burn_in = burn_in;
    dist.horizon = horizon;
    dist.events = sim.candidate_events();
    dist.seed = seed;

    double total1 = 0.0, total2 = 0.0;
    for (auto& [k, v] : w1) total1 += v;
    for (auto& [k, v] : w2) total2 += v;
    const double window = horizon - burn_in;
    for (auto& [k, v] : w1) dist.frequency[k] += v / window;
    for (auto& [k, v] : w2) dist.frequency[k] += v / window;

    double tv = 0.0;
    auto i1 = w1.begin();
    auto i2 = w2.begin();
    while (i1 != w1.end() || i2 != w2.end()) {
        if (i2 == w2.end() || (i1 != w1.end() && i1->first < i2->first)) {
            tv += i1->second / total1;
            ++i1;
        } else if (i1 == w1.end() || i2->first < i1->first) {
            tv += i2->second / total2;
            ++i2;
        } else {
            tv += std::abs(i1->second / total1 - i2->second / total2);
            ++i1;
            ++i2;
        }
    }
    dist.half_tv = 0.5 * tv;
    dist.converged = dist.half_tv <= 0.05;
    return dist;
}

}  // namespace gw
