#include "gw/engine.hpp"

#include "gw/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace gw {

StreamFamily::StreamFamily(const RateTriple& dominating, int n_sites,
                           std::uint64_t seed)
    : n_(n_sites), seed_(seed) {
    if (n_sites < 1)
        throw std::invalid_argument("StreamFamily: needs at least one site");
    const auto b = dominating.sorted();
    b_[0] = b[0];
    b_[1] = b[1];
    b_[2] = b[2];
    const double intensity[3] = {b[0], b[1] - b[0], b[2] - b[1]};
    sub_.resize(static_cast<size_t>(n_sites) * 3);
    for (int j = 1; j <= n_sites; ++j) {
        for (int k = 0; k < 3; ++k) {
            const size_t idx = static_cast<size_t>(j - 1) * 3 + static_cast<size_t>(k);
            Sub& s = sub_[idx];
            s.rate = intensity[k];
            if (s.rate <= 0.0) continue;  // degenerate sub-stream never fires
            s.rng.reseed(derive_seed(seed, idx));
            const double t = exp_gap(s.rng, s.rate);
            s.mark = u01(s.rng);
            heap_.push(Entry{t, j, k});
        }
    }
    // b0 > 0, so every site has at least one live sub-stream.
}

double StreamFamily::b(int k) const {
    if (k < 0 || k > 2) throw std::out_of_range("StreamFamily: level must be 0..2");
    return b_[k];
}

Event StreamFamily::pop() {
    const Entry top = heap_.top();
    heap_.pop();
    const size_t idx =
        static_cast<size_t>(top.site - 1) * 3 + static_cast<size_t>(top.level);
    Sub& s = sub_[idx];
    Event ev;
    ev.time = top.time;
    ev.site = top.site;
    ev.level = top.level;
    ev.mark = s.mark;
    const double next = top.time + exp_gap(s.rng, s.rate);
    s.mark = u01(s.rng);
    heap_.push(Entry{next, top.site, top.level});
    return ev;
}

PoissonSimulator::PoissonSimulator(const RateTriple& beta, Configuration cfg0,
                                   std::uint64_t seed)
    : beta_(beta),
      streams_(beta, cfg0.n(), seed),
      state_(std::move(cfg0)),
      deposits_(static_cast<size_t>(state_.n()), 0) {}

bool PoissonSimulator::step(double horizon, Event* ev) {
    if (streams_.next_time() > horizon) {
        time_ = horizon;
        return false;
    }
    Event e = streams_.pop();
    ++candidates_;
    time_ = e.time;
    if (transition_rate(state_, beta_, e.site) >= streams_.b(e.level)) {
        e.accepted = true;
        deposit_in_place(state_, e.site);
        ++deposits_[static_cast<size_t>(e.site - 1)];
        ++accepted_;
    }
    if (ev) *ev = e;
    return true;
}

GillespieSimulator::GillespieSimulator(const RateTriple& beta, Configuration cfg0,
                                       std::uint64_t seed)
    : beta_(beta),
      state_(std::move(cfg0)),
      rng_(derive_seed(seed, 0x67696c6cULL)),
      deposits_(static_cast<size_t>(state_.n()), 0) {
    draw_pending();
}

void GillespieSimulator::draw_pending() {
    const int n = state_.n();
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += transition_rate(state_, beta_, j);
    const double gap = exp_gap(rng_, total);
    const double pick = u01(rng_) * total;
    int site = n;
    double acc = 0.0;
    for (int j = 1; j <= n; ++j) {
        acc += transition_rate(state_, beta_, j);
        if (pick < acc) {
            site = j;
            break;
        }
    }
    pending_time_ = time_ + gap;
    pending_site_ = site;
}

bool GillespieSimulator::step(double horizon, Event* ev) {
    if (pending_time_ > horizon) {
        time_ = horizon;
        return false;
    }
    time_ = pending_time_;
    const int site = pending_site_;
    Event e;
    e.time = time_;
    e.site = site;
    e.level = neighbor_count(state_, site);
    e.accepted = true;
    deposit_in_place(state_, site);
    ++deposits_[static_cast<size_t>(site - 1)];
    ++accepted_;
    draw_pending();
    if (ev) *ev = e;
    return true;
}

namespace {

int max_sites(const CoupleSpec& spec) {
    if (spec.participants.empty())
        throw std::invalid_argument("run_coupled: needs at least one participant");
    int n = 0;
    for (const auto& p : spec.participants) {
        if (!p.beta.monotone())
            throw std::invalid_argument(
                "run_coupled: participant rates must satisfy beta0<=beta1<=beta2 "
                "(the coupling guarantees hold only for monotone triples)");
        n = std::max(n, p.cfg0.n());
    }
    return n;
}

double max_rate(const CoupleSpec& spec) {
    double m = 0.0;
    for (const auto& p : spec.participants) m = std::max(m, p.beta.max());
    return m;
}

}  // namespace

CoupledSimulator::CoupledSimulator(const CoupleSpec& spec)
    : streams_(RateTriple(max_rate(spec), max_rate(spec), max_rate(spec)),
               max_sites(spec), spec.seed),
      b2max_(max_rate(spec)) {
    for (const auto& p : spec.participants) {
        betas_.push_back(p.beta);
        states_.push_back(p.cfg0);
        deposits_.emplace_back(static_cast<size_t>(p.cfg0.n()), 0);
    }
}

bool CoupledSimulator::step(double horizon, Event* ev, std::vector<bool>* accept) {
    if (streams_.next_time() > horizon) {
        time_ = horizon;
        return false;
    }
    Event e = streams_.pop();
    ++candidates_;
    time_ = e.time;
    if (accept) accept->assign(states_.size(), false);
    const double threshold = e.mark * b2max_;
    for (size_t p = 0; p < states_.size(); ++p) {
        if (e.site > states_[p].n()) continue;  // prefix embedding
        if (threshold < transition_rate(states_[p], betas_[p], e.site)) {
            deposit_in_place(states_[p], e.site);
            ++deposits_[p][static_cast<size_t>(e.site - 1)];
            e.accepted = true;
            if (accept) (*accept)[p] = true;
        }
    }
    if (ev) *ev = e;
    return true;
}

namespace {

void check_run_args(double horizon, const std::vector<double>& schedule) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    double prev = 0.0;
    for (double s : schedule) {
        if (s < prev || s > horizon)
            throw std::invalid_argument(
                "snapshot schedule must be ascending within [0, horizon]");
        prev = s;
    }
}

// Drives any simulator with step(horizon, Event*)/next_time()/state() through
// the schedule; snapshots are replayed, never interpolated.
template <class Sim>
void replay(Sim& sim, double horizon, const std::vector<double>& schedule,
            Trajectory& out) {
    size_t si = 0;
    while (sim.next_time() <= horizon) {
        const double tn = sim.next_time();
        while (si < schedule.size() && schedule[si] < tn)
            out.snapshots.push_back(sim.state().heights), ++si;
        sim.step(horizon, nullptr);
    }
    while (si < schedule.size())
        out.snapshots.push_back(sim.state().heights), ++si;
}

}  // namespace

Trajectory run_poisson(const RateTriple& beta, const Configuration& cfg0,
                       double horizon, const std::vector<double>& schedule,
                       std::uint64_t seed) {
    check_run_args(horizon, schedule);
    Trajectory out{cfg0, beta, seed, horizon, schedule, {}, 0, {}};
    PoissonSimulator sim(beta, cfg0, seed);
    replay(sim, horizon, schedule, out);
    out.event_count = sim.candidate_events();
    out.deposits = sim.deposits();
    return out;
}

Trajectory run_gillespie(const RateTriple& beta, const Configuration& cfg0,
                         double horizon, const std::vector<double>& schedule,
                         std::uint64_t seed) {
    check_run_args(horizon, schedule);
    Trajectory out{cfg0, beta, seed, horizon, schedule, {}, 0, {}};
    GillespieSimulator sim(beta, cfg0, seed);
    replay(sim, horizon, schedule, out);
    out.event_count = sim.accepted_events();
    out.deposits = sim.deposits();
    return out;
}

std::vector<Trajectory> run_coupled(const CoupleSpec& spec, double horizon,
                                    const std::vector<double>& schedule) {
    check_run_args(horizon, schedule);
    CoupledSimulator sim(spec);
    const size_t np = spec.participants.size();
    std::vector<Trajectory> out(np);
    for (size_t p = 0; p < np; ++p) {
        out[p].initial = spec.participants[p].cfg0;
        out[p].beta = spec.participants[p].beta;
        out[p].seed = spec.seed;
        out[p].horizon = horizon;
        out[p].schedule = schedule;
    }
    size_t si = 0;
    auto snap_all = [&] {
        for (size_t p = 0; p < np; ++p)
            out[p].snapshots.push_back(sim.state(static_cast<int>(p)).heights);
    };
    while (sim.next_time() <= horizon) {
        const double tn = sim.next_time();
        while (si < schedule.size() && schedule[si] < tn) snap_all(), ++si;
        sim.step(horizon, nullptr);
    }
    while (si < schedule.size()) snap_all(), ++si;
    for (size_t p = 0; p < np; ++p) {
        out[p].event_count = sim.candidate_events();
        out[p].deposits = sim.deposits(static_cast<int>(p));
    }
    return out;
}

RateTriple derive_aux_process(const RateTriple& beta) {
    return RateTriple(beta.beta0, beta.beta1, beta.beta1);
}

}  // namespace gw
