#include "gw/io.hpp"

#include "gw/version.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gw {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    json j;
    f >> j;
    return j;
}

void save_json_file(const std::string& path, const nlohmann::json& j) {
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

nlohmann::json beta_json(const RateTriple& beta) {
    return json::array({beta.beta0, beta.beta1, beta.beta2});
}

RateTriple beta_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("beta must be an array of three rates");
    return RateTriple(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void write_trajectory_csv(const Trajectory& t, const std::string& path) {
    auto f = open_out(path);
    f << "time";
    for (int j = 1; j <= t.initial.n(); ++j) f << ",site_" << j;
    f << '\n';
    for (size_t s = 0; s < t.schedule.size(); ++s) {
        f << fmt_double(t.schedule[s]);
        for (auto h : t.snapshots[s]) f << ',' << h;
        f << '\n';
    }
}

void write_trajectory_sidecar(const Trajectory& t, const std::string& path) {
    json j;
    j["beta"] = beta_json(t.beta);
    j["boundary"] = std::string(boundary_name(t.initial.boundary));
    j["seed"] = t.seed;
    j["horizon"] = t.horizon;
    j["event_count"] = t.event_count;
    save_json_file(path, j);
}

void write_stationary_csv(const TruncatedChain& chain, const StationarySolve& sol,
                          const std::string& path) {
    auto f = open_out(path);
    for (int c = 1; c <= chain.dim; ++c) f << 'h' << '_' << c << ',';
    f << "pi\n";
    for (int idx = 0; idx < chain.states; ++idx) {
        for (int h : chain.state_of(idx)) f << h << ',';
        f << fmt_double(sol.pi[static_cast<size_t>(idx)]) << '\n';
    }
}

nlohmann::json verdict_json(const RegionVerdict& v) {
    json j;
    j["n"] = v.n;
    j["beta"] = beta_json(v.beta);
    j["label"] = std::string(verdict_label_name(v.label));
    j["cond_prior"] = v.cond_prior;
    j["m"] = v.m;
    j["thr_a"] = v.thr_a;
    j["thr_b"] = v.thr_b;
    j["thr_c"] = v.thr_c;
    j["cond_a"] = v.cond_a;
    j["cond_b"] = v.cond_b;
    j["cond_c"] = v.cond_c;
    j["monotone"] = v.monotone;
    j["two_sites"] = v.two_sites;
    j["h3"] = v.h3;
    j["comb_case"] = v.comb_case;
    j["transience_applicable"] = v.transience_applicable;
    j["transience_B"] = finite_or_null(v.transience_B);
    j["transience"] = v.transience;
    return j;
}

nlohmann::json speed_json(const SpeedEstimate& est) {
    json j;
    j["speed"] = est.speed;
    j["se"] = est.se;
    j["replicas"] = est.replicas;
    j["horizon"] = est.horizon;
    j["max_gap_se"] = est.max_gap_se;
    j["seed"] = est.seed;
    return j;
}

nlohmann::json tail_json(const TailFit& fit) {
    json j;
    j["coordinate"] = fit.coordinate;
    j["k_grid"] = fit.k_grid;
    j["horizons"] = fit.horizons;
    json rows = json::array();
    for (auto& row : fit.log_p) {
        json r = json::array();
        for (double lp : row) r.push_back(finite_or_null(lp));
        rows.push_back(std::move(r));
    }
    j["log_p"] = std::move(rows);
    j["alpha_hat"] = fit.alpha_hat;
    j["intercept"] = fit.intercept;
    j["gof"] = fit.gof;
    j["slope_stable"] = fit.slope_stable;
    j["tail_too_light"] = fit.tail_too_light;
    j["replicas"] = fit.replicas;
    j["seed"] = fit.seed;
    return j;
}

nlohmann::json comb_json(const CombMatch& m) {
    json j;
    j["observed"] = m.observed;
    j["nearest"] = m.nearest;
    j["matched"] = m.matched;
    j["deviation"] = m.deviation;
    j["searched"] = std::string(comb_case_name(m.searched));
    j["tol"] = m.tol;
    return j;
}

nlohmann::json dtilde_json(const DtildeEstimate& est) {
    json j;
    j["n"] = est.n;
    j["beta0"] = est.beta0;
    j["beta1"] = est.beta1;
    j["d_grid"] = est.d_grid;
    j["slope"] = est.slope;
    json lo = json::array();
    for (double s : est.slope_lo) lo.push_back(finite_or_null(s));
    j["slope_lo"] = std::move(lo);
    j["d_hat"] = est.d_hat;
    j["bracket_lo"] = est.bracket_lo;
    j["bracket_hi"] = est.bracket_hi;
    j["upper_endpoint"] = est.upper_endpoint;
    j["replicas"] = est.replicas;
    j["seed"] = est.seed;
    return j;
}

nlohmann::json shape_json(const ShapeDistribution& dist) {
    json j;
    j["burn_in"] = dist.burn_in;
    j["horizon"] = dist.horizon;
    j["events"] = dist.events;
    j["converged"] = dist.converged;
    j["half_tv"] = dist.half_tv;
    j["seed"] = dist.seed;
    json rows = json::array();
    for (auto& [h, f] : dist.frequency) rows.push_back(json{{"h", h}, {"f", f}});
    j["frequency"] = std::move(rows);
    return j;
}

nlohmann::json stationary_json(const StationarySolve& sol) {
    json j;
    j["residual"] = sol.residual;
    j["boundary_mass"] = sol.boundary_mass;
    j["vhat"] = sol.vhat;
    j["converged"] = sol.converged;
    return j;
}

void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["outputs"] = outputs;
    save_json_file(path, j);
}

}  // namespace gw
