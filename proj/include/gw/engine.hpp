#pragma once

#include "gw/model.hpp"
#include "gw/rng.hpp"

#include <cstdint>
#include <queue>
#include <vector>

namespace gw {

// One candidate event of the per-site dominating-rate streams.
struct Event {
    double time = 0.0;
    int site = 0;        // 1..n
    int level = 0;       // which thinned sub-stream fired: 0, 1 or 2
    double mark = 0.0;   // independent uniform in [0,1); couplings accept on it
    bool accepted = false;
};

// Per-site thinned Poisson streams. With b0 <= b1 <= b2 the sorted rates of
// the dominating triple, sub-stream (j,k) has intensity b0, b1-b0, b2-b1 for
// k = 0,1,2, so the per-site superposition has intensity b2. Events come out
// lazily in time order (a priority queue over the 3n pending gaps); each
// carries an independent uniform mark. Equal timestamps, possible in binary
// arithmetic, break deterministically by (site, level).
class StreamFamily {
public:
    StreamFamily(const RateTriple& dominating, int n_sites, std::uint64_t seed);

    double b(int k) const;
    int sites() const { return n_; }
    std::uint64_t seed() const { return seed_; }

    double next_time() const { return heap_.top().time; }
    Event pop();  // consume the earliest event; schedules that stream's next

private:
    struct Sub {
        double mark = 0.0;
        double rate = 0.0;
        Rng rng;
    };
    struct Entry {
        double time;
        int site;
        int level;
        bool operator>(const Entry& o) const {
            if (time != o.time) return time > o.time;
            if (site != o.site) return site > o.site;
            return level > o.level;
        }
    };

    int n_;
    std::uint64_t seed_;
    double b_[3];
    std::vector<Sub> sub_;  // index (site-1)*3 + level
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

// Event-driven crystal process: a level-k candidate at site j deposits iff
// beta_{V_j(state before the event)} >= b_k.
class PoissonSimulator {
public:
    PoissonSimulator(const RateTriple& beta, Configuration cfg0, std::uint64_t seed);

    const Configuration& state() const { return state_; }
    const RateTriple& beta() const { return beta_; }
    double time() const { return time_; }
    double next_time() const { return streams_.next_time(); }
    std::uint64_t candidate_events() const { return candidates_; }
    std::uint64_t accepted_events() const { return accepted_; }
    const std::vector<std::uint64_t>& deposits() const { return deposits_; }

    // Processes the next candidate event if it falls by `horizon` and returns
    // true; otherwise just moves the clock to `horizon` and returns false.
    bool step(double horizon, Event* ev = nullptr);

private:
    RateTriple beta_;
    StreamFamily streams_;
    Configuration state_;
    double time_ = 0.0;
    std::vector<std::uint64_t> deposits_;
    std::uint64_t candidates_ = 0;
    std::uint64_t accepted_ = 0;
};

// Oracle engine sampling the generator directly: exponential holding time at
// total rate sum_j beta_{V_j}, deposit site chosen proportionally to its rate.
class GillespieSimulator {
public:
    GillespieSimulator(const RateTriple& beta, Configuration cfg0, std::uint64_t seed);

    const Configuration& state() const { return state_; }
    double time() const { return time_; }
    double next_time() const { return pending_time_; }
    std::uint64_t accepted_events() const { return accepted_; }
    const std::vector<std::uint64_t>& deposits() const { return deposits_; }

    bool step(double horizon, Event* ev = nullptr);

private:
    void draw_pending();

    RateTriple beta_;
    Configuration state_;
    Rng rng_;
    double time_ = 0.0;
    double pending_time_ = 0.0;
    int pending_site_ = 0;
    std::vector<std::uint64_t> deposits_;
    std::uint64_t accepted_ = 0;
};

struct CoupleParticipant {
    RateTriple beta;
    Configuration cfg0;
};

// Participants driven by one shared stream family whose dominating rate is
// b2max = max over all participants' rates; participants with fewer sites
// listen to their own site indices only (prefix embedding).
struct CoupleSpec {
    std::vector<CoupleParticipant> participants;
    std::uint64_t seed = 0;
};

// Shared-randomness coupling. Every candidate event carries a uniform mark u;
// participant p deposits at site j iff u * b2max < beta^p_{V_j(own state)}.
// For a single participant this reproduces the level-rule law; for monotone
// triples it preserves the componentwise order between ordered participants
// at every event. Requires beta0 <= beta1 <= beta2 for every participant.
class CoupledSimulator {
public:
    explicit CoupledSimulator(const CoupleSpec& spec);

    int participants() const { return static_cast<int>(states_.size()); }
    const Configuration& state(int p) const { return states_[static_cast<size_t>(p)]; }
    const std::vector<std::uint64_t>& deposits(int p) const {
        return deposits_[static_cast<size_t>(p)];
    }
    double time() const { return time_; }
    double next_time() const { return streams_.next_time(); }
    std::uint64_t candidate_events() const { return candidates_; }

    // accept (when given) is resized to the participant count and records who
    // deposited at this event.
    bool step(double horizon, Event* ev = nullptr, std::vector<bool>* accept = nullptr);

private:
    std::vector<RateTriple> betas_;
    std::vector<Configuration> states_;
    std::vector<std::vector<std::uint64_t>> deposits_;
    StreamFamily streams_;
    double b2max_;
    double time_ = 0.0;
    std::uint64_t candidates_ = 0;
};

// Snapshots of one run. event_count counts engine events processed: candidate
// stream events for the Poisson engine, deposits for the Gillespie oracle.
struct Trajectory {
    Configuration initial;
    RateTriple beta;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    std::vector<double> schedule;                       // ascending, within [0,horizon]
    std::vector<std::vector<std::uint64_t>> snapshots;  // heights at each time
    std::uint64_t event_count = 0;
    std::vector<std::uint64_t> deposits;                // accepted, per site
};

// All runners take snapshots by replay: the process is piecewise constant and
// right-continuous, so the snapshot at s reflects every event with time <= s.
Trajectory run_poisson(const RateTriple& beta, const Configuration& cfg0,
                       double horizon, const std::vector<double>& schedule,
                       std::uint64_t seed);
Trajectory run_gillespie(const RateTriple& beta, const Configuration& cfg0,
                         double horizon, const std::vector<double>& schedule,
                         std::uint64_t seed);
std::vector<Trajectory> run_coupled(const CoupleSpec& spec, double horizon,
                                    const std::vector<double>& schedule);

// The auxiliary parameters (beta0, beta1, beta1).
RateTriple derive_aux_process(const RateTriple& beta);

}  // namespace gw
