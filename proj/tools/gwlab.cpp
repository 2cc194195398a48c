// gwlab: command-line laboratory for the Gates-Westcott crystal growth model.
// Every command is reproducible from its flags (or an equivalent --config JSON
// file); file artifacts land under --out only, plus a manifest that records the
// effective config.
#include <CLI11.hpp>
#include <json.hpp>

#include "gw/analysis.hpp"
#include "gw/engine.hpp"
#include "gw/exact.hpp"
#include "gw/io.hpp"
#include "gw/model.hpp"
#include "gw/sweep.hpp"
#include "gw/version.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double parse_double(const std::string& field, const char* what) {
    try {
        size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("invalid number '") + field + "' in " + what);
    }
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

// Lenient: components may be zero when the requested quantity ignores them;
// each operation validates the rates it actually uses.
std::array<double, 3> parse_beta3(const std::string& text) {
    auto fields = split_commas(text);
    if (fields.size() != 3)
        throw std::invalid_argument("beta needs exactly three comma-separated rates");
    return {parse_double(fields[0], "beta"), parse_double(fields[1], "beta"),
            parse_double(fields[2], "beta")};
}

gw::RateTriple make_triple(const std::array<double, 3>& b) {
    return gw::RateTriple(b[0], b[1], b[2]);
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
    auto fields = split_commas(text);
    if (fields.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
    std::vector<double> out;
    out.reserve(fields.size());
    for (auto& f : fields) out.push_back(parse_double(f, what));
    return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
    std::vector<int> out;
    for (double v : parse_doubles(text, what)) {
        int k = static_cast<int>(v);
        if (static_cast<double>(k) != v)
            throw std::invalid_argument(std::string(what) + " entries must be integers");
        out.push_back(k);
    }
    return out;
}

// Collects artifact names and writes the closing manifest.
struct Sink {
    std::string command;
    fs::path dir;  // empty: file output disabled
    json config;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;

    bool enabled() const { return !dir.empty(); }

    std::string path(const std::string& name) {
        outputs.push_back(name);
        return (dir / name).string();
    }

    void finish(const json& summary) { finish_line(summary.dump()); }

    void finish_line(const std::string& line) {
        if (enabled())
            gw::write_manifest((dir / "manifest.json").string(), command, config, seed, outputs);
        std::cout << line << '\n';
    }
};

Sink make_sink(const std::string& command, const std::string& out, json config,
               std::uint64_t seed) {
    Sink s{command, {}, std::move(config), seed, {}};
    if (!out.empty()) {
        fs::create_directories(out);
        s.dir = out;
    }
    return s;
}

std::vector<double> snapshot_schedule(double horizon, double dt) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (dt < 0.0) throw std::invalid_argument("snapshot spacing must be nonnegative");
    std::vector<double> s;
    if (dt > 0.0)
        for (long long k = 1; static_cast<double>(k) * dt < horizon; ++k)
            s.push_back(static_cast<double>(k) * dt);
    s.push_back(horizon);
    return s;
}

// ---- simulate ---------------------------------------------------------

struct SimulateOpts {
    std::string beta;
    int n = 2;
    std::string boundary = "zero";
    std::string init;
    double horizon = 0.0;
    double snapshots = 0.0;
    std::string engine = "poisson";
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

json cfg_common_sites(const std::string& init, int n, const std::string& boundary) {
    json c;
    if (!init.empty()) {
        c["init"] = init;
    } else {
        c["n"] = n;
        c["boundary"] = boundary;
    }
    return c;
}

gw::Configuration resolve_cfg(const std::string& init, int n, const std::string& boundary) {
    if (!init.empty()) return gw::parse_configuration(init);
    return gw::flat_configuration(n, gw::parse_boundary(boundary));
}

void run_simulate(const SimulateOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    gw::Configuration cfg0 = resolve_cfg(o.init, o.n, o.boundary);
    auto schedule = snapshot_schedule(o.horizon, o.snapshots);
    gw::Trajectory t;
    if (o.engine == "poisson")
        t = gw::run_poisson(beta, cfg0, o.horizon, schedule, o.seed);
    else if (o.engine == "gillespie")
        t = gw::run_gillespie(beta, cfg0, o.horizon, schedule, o.seed);
    else
        throw std::invalid_argument("engine must be poisson or gillespie");

    json config = cfg_common_sites(o.init, o.n, o.boundary);
    config["beta"] = o.beta;
    config["horizon"] = o.horizon;
    config["snapshots"] = o.snapshots;
    config["engine"] = o.engine;
    config["seed"] = o.seed;
    Sink sink = make_sink("simulate", o.out, config, o.seed);
    if (sink.enabled()) {
        gw::write_trajectory_csv(t, sink.path("trajectory.csv"));
        gw::write_trajectory_sidecar(t, sink.path("trajectory.json"));
    }
    auto& last = t.snapshots.back();
    double mean = std::accumulate(last.begin(), last.end(), 0.0) /
                  static_cast<double>(last.size());
    std::uint64_t deposits = std::accumulate(t.deposits.begin(), t.deposits.end(),
                                             std::uint64_t{0});
    sink.finish(json{{"command", "simulate"},
                     {"n", cfg0.n()},
                     {"event_count", t.event_count},
                     {"deposits", deposits},
                     {"final_height_mean", mean}});
}

// ---- couple ------------------------------------------------------------

struct CoupleOpts {
    std::string beta;
    std::string beta_alt;
    int n = 2;
    int n_alt = 0;
    std::string init;
    std::string init_alt;
    std::string boundary = "zero";
    double horizon = 0.0;
    double snapshots = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void run_couple(const CoupleOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    gw::RateTriple beta_alt =
        o.beta_alt.empty() ? beta : make_triple(parse_beta3(o.beta_alt));
    int n_alt = o.n_alt > 0 ? o.n_alt : o.n;
    gw::Configuration cfg = resolve_cfg(o.init, o.n, o.boundary);
    gw::Configuration cfg_alt = resolve_cfg(o.init_alt, n_alt, o.boundary);
    auto schedule = snapshot_schedule(o.horizon, o.snapshots);

    gw::CoupleSpec spec;
    spec.seed = o.seed;
    spec.participants = {{beta, cfg}, {beta_alt, cfg_alt}};
    auto trajs = gw::run_coupled(spec, o.horizon, schedule);

    int shared = std::min(cfg.n(), cfg_alt.n());
    bool leq = true;
    bool geq = true;
    for (size_t s = 0; s < schedule.size(); ++s)
        for (int j = 0; j < shared; ++j) {
            auto a = trajs[0].snapshots[s][static_cast<size_t>(j)];
            auto b = trajs[1].snapshots[s][static_cast<size_t>(j)];
            leq = leq && a <= b;
            geq = geq && b <= a;
        }

    json config = cfg_common_sites(o.init, o.n, o.boundary);
    config["beta"] = o.beta;
    if (!o.beta_alt.empty()) config["beta-alt"] = o.beta_alt;
    if (o.n_alt > 0) config["n-alt"] = o.n_alt;
    if (!o.init_alt.empty()) config["init-alt"] = o.init_alt;
    config["horizon"] = o.horizon;
    config["snapshots"] = o.snapshots;
    config["seed"] = o.seed;
    Sink sink = make_sink("couple", o.out, config, o.seed);

    json report{{"shared_sites", shared},
                {"first_leq_second", leq},
                {"second_leq_first", geq},
                {"event_count", trajs[0].event_count}};
    if (sink.enabled()) {
        gw::write_trajectory_csv(trajs[0], sink.path("trajectory_1.csv"));
        gw::write_trajectory_sidecar(trajs[0], sink.path("trajectory_1.json"));
        gw::write_trajectory_csv(trajs[1], sink.path("trajectory_2.csv"));
        gw::write_trajectory_sidecar(trajs[1], sink.path("trajectory_2.json"));
        gw::save_json_file(sink.path("couple.json"), report);
    }
    json summary = report;
    summary["command"] = "couple";
    sink.finish(summary);
}

// ---- speed -------------------------------------------------------------

struct SpeedOpts {
    std::string beta;
    int n = 2;
    std::string boundary = "zero";
    std::string init;
    double horizon = 0.0;
    int replicas = 50;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string config;
};

void run_speed(const SpeedOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    gw::Configuration cfg0 = resolve_cfg(o.init, o.n, o.boundary);
    auto est = gw::estimate_speeds(beta, cfg0, o.horizon, o.replicas, o.seed, o.threads);

    json config = cfg_common_sites(o.init, o.n, o.boundary);
    config["beta"] = o.beta;
    config["horizon"] = o.horizon;
    config["replicas"] = o.replicas;
    config["seed"] = o.seed;
    Sink sink = make_sink("speed", o.out, config, o.seed);
    if (sink.enabled()) gw::save_json_file(sink.path("speed.json"), gw::speed_json(est));
    sink.finish(json{{"command", "speed"},
                     {"speed", est.speed},
                     {"max_gap_se", est.max_gap_se},
                     {"replicas", est.replicas}});
}

// ---- tail --------------------------------------------------------------

struct TailOpts {
    std::string beta;
    int n = 3;
    std::string boundary = "zero";
    std::string init;
    int coordinate = 0;
    double horizon = 0.0;
    std::string horizons;
    std::string k_grid = "1,2,3,4,5,6,7,8";
    int replicas = 200;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string config;
};

void run_tail(const TailOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    gw::Configuration cfg0 = resolve_cfg(o.init, o.n, o.boundary);
    std::vector<double> horizons;
    if (!o.horizons.empty()) {
        horizons = parse_doubles(o.horizons, "horizons");
    } else {
        if (!(o.horizon > 0.0))
            throw std::invalid_argument("tail needs --horizon or --horizons");
        horizons = {o.horizon / 4.0, o.horizon / 2.0, o.horizon};
    }
    int coordinate = o.coordinate > 0 ? o.coordinate : std::max(1, cfg0.n() / 2);
    auto k_grid = parse_ints(o.k_grid, "k-grid");
    auto fit = gw::fit_tail(beta, cfg0, coordinate, horizons, k_grid, o.replicas, o.seed,
                            o.threads);

    json config = cfg_common_sites(o.init, o.n, o.boundary);
    config["beta"] = o.beta;
    if (!o.horizons.empty())
        config["horizons"] = o.horizons;
    else
        config["horizon"] = o.horizon;
    if (o.coordinate > 0) config["coordinate"] = o.coordinate;
    config["k-grid"] = o.k_grid;
    config["replicas"] = o.replicas;
    config["seed"] = o.seed;
    Sink sink = make_sink("tail", o.out, config, o.seed);
    if (sink.enabled()) gw::save_json_file(sink.path("tail.json"), gw::tail_json(fit));
    sink.finish(json{{"command", "tail"},
                     {"coordinate", fit.coordinate},
                     {"alpha_hat", fit.alpha_hat},
                     {"slope_stable", fit.slope_stable},
                     {"tail_too_light", fit.tail_too_light}});
}

// ---- comb --------------------------------------------------------------

struct CombOpts {
    std::string beta;
    int n = 2;
    std::string case_name;
    bool enumerate_only = false;
    double horizon = 2000.0;
    int replicas = 20;
    double tol = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string config;
};

void run_comb(const CombOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    gw::CombCase c = gw::parse_comb_case(o.case_name);

    json config{{"beta", o.beta}, {"n", o.n}, {"case", o.case_name}};
    if (o.enumerate_only) {
        auto set = gw::enumerate_comb_set(o.n, beta, c);
        config["enumerate"] = true;
        Sink sink = make_sink("comb", o.out, config, o.seed);
        if (sink.enabled()) {
            std::ofstream f(sink.path("comb_set.csv"), std::ios::binary);
            for (int j = 1; j <= o.n; ++j) f << (j > 1 ? "," : "") << "site_" << j;
            f << '\n';
            for (auto& row : set) {
                for (size_t j = 0; j < row.size(); ++j)
                    f << (j > 0 ? "," : "") << gw::fmt_double(row[j]);
                f << '\n';
            }
        }
        sink.finish(json{{"command", "comb"},
                         {"case", std::string(gw::comb_case_name(c))},
                         {"count", set.size()}});
        return;
    }

    gw::Configuration cfg0 = gw::flat_configuration(o.n, gw::Boundary::Zero);
    auto est = gw::estimate_speeds(beta, cfg0, o.horizon, o.replicas, o.seed, o.threads);
    double tol = o.tol > 0.0 ? o.tol : gw::default_comb_tol(beta);
    auto match = gw::classify_comb(est.speed, beta, c, tol);

    config["horizon"] = o.horizon;
    config["replicas"] = o.replicas;
    if (o.tol > 0.0) config["tol"] = o.tol;
    config["seed"] = o.seed;
    Sink sink = make_sink("comb", o.out, config, o.seed);
    if (sink.enabled()) {
        gw::save_json_file(sink.path("comb.json"), gw::comb_json(match));
        gw::save_json_file(sink.path("speed.json"), gw::speed_json(est));
    }
    sink.finish(json{{"command", "comb"},
                     {"case", std::string(gw::comb_case_name(c))},
                     {"matched", match.matched},
                     {"deviation", match.deviation},
                     {"tol", match.tol}});
}

// ---- dtilde ------------------------------------------------------------

struct DtildeOpts {
    std::string beta;
    int n = 1;
    std::string grid;
    double horizon = 0.0;
    std::string horizons;
    int replicas = 200;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string config;
};

void run_dtilde(const DtildeOpts& o) {
    auto b = parse_beta3(o.beta);  // beta2 ignored: the auxiliary process uses beta1 twice
    auto d_grid = parse_doubles(o.grid, "grid");
    std::vector<double> horizons;
    if (!o.horizons.empty()) {
        horizons = parse_doubles(o.horizons, "horizons");
    } else {
        if (!(o.horizon > 0.0))
            throw std::invalid_argument("dtilde needs --horizon or --horizons");
        horizons = {o.horizon / 3.0, 2.0 * o.horizon / 3.0, o.horizon};
    }
    auto est = gw::estimate_dtilde(o.n, b[1], b[0], d_grid, horizons, o.replicas, o.seed,
                                   o.threads);

    json config{{"beta", o.beta}, {"n", o.n}, {"grid", o.grid}};
    if (!o.horizons.empty())
        config["horizons"] = o.horizons;
    else
        config["horizon"] = o.horizon;
    config["replicas"] = o.replicas;
    config["seed"] = o.seed;
    Sink sink = make_sink("dtilde", o.out, config, o.seed);
    if (sink.enabled()) gw::save_json_file(sink.path("dtilde.json"), gw::dtilde_json(est));
    sink.finish(json{{"command", "dtilde"},
                     {"d_hat", est.d_hat},
                     {"bracket", {est.bracket_lo, est.bracket_hi}},
                     {"upper_endpoint", est.upper_endpoint}});
}

// ---- exact -------------------------------------------------------------

struct ExactOpts {
    std::string beta;
    int n = 2;
    int truncation = 30;
    long long mu_index = 0;
    double vitesse_eps = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    CLI::Option* v2 = nullptr;
    CLI::Option* v2inf = nullptr;
    CLI::Option* mu = nullptr;
    CLI::Option* transience = nullptr;
    CLI::Option* vitesse = nullptr;
    CLI::Option* solve = nullptr;
};

void run_exact(const ExactOpts& o) {
    auto b = parse_beta3(o.beta);
    int picked = static_cast<int>(o.v2->count() > 0) + static_cast<int>(o.v2inf->count() > 0) +
                 static_cast<int>(o.mu->count() > 0) +
                 static_cast<int>(o.transience->count() > 0) +
                 static_cast<int>(o.vitesse->count() > 0) +
                 static_cast<int>(o.solve->count() > 0);
    if (picked != 1)
        throw std::invalid_argument(
            "exact needs exactly one of --v2 --v2inf --mu --transience-b --vitesse --solve");

    json config{{"beta", o.beta}};
    if (o.solve->count() > 0) {
        gw::RateTriple beta = make_triple(b);
        auto chain = gw::build_truncated(o.n, beta, o.truncation);
        auto sol = gw::solve_stationary(chain);
        config["solve"] = true;
        config["n"] = o.n;
        config["truncation"] = o.truncation;
        Sink sink = make_sink("exact", o.out, config, o.seed);
        if (sink.enabled()) {
            gw::write_stationary_csv(chain, sol, sink.path("stationary.csv"));
            gw::save_json_file(sink.path("stationary.json"), gw::stationary_json(sol));
        }
        json summary = gw::stationary_json(sol);
        summary["command"] = "exact";
        sink.finish(summary);
        return;
    }

    std::string query;
    double value = 0.0;
    if (o.v2->count() > 0) {
        query = "v2";
        value = gw::v2(b[0], b[1]);
        config["v2"] = true;
    } else if (o.v2inf->count() > 0) {
        query = "v2inf";
        value = gw::v2_inf(b[1], b[2]);
        config["v2inf"] = true;
    } else if (o.mu->count() > 0) {
        query = "mu";
        value = gw::mu_n2(b[0], b[1], o.mu_index);
        config["mu"] = o.mu_index;
    } else if (o.transience->count() > 0) {
        query = "transience-b";
        value = gw::transience_B(b[0], b[2]);
        config["transience-b"] = true;
    } else {
        query = "vitesse";
        value = gw::vitesse_threshold(b[0], b[2], o.vitesse_eps);
        config["vitesse"] = o.vitesse_eps;
    }
    Sink sink = make_sink("exact", o.out, config, o.seed);
    if (sink.enabled())
        gw::save_json_file(sink.path("exact.json"),
                           json{{"query", query}, {"beta", {b[0], b[1], b[2]}}, {"value", value}});
    sink.finish_line(gw::fmt_double(value));
}

// ---- verdict -----------------------------------------------------------

struct VerdictOpts {
    std::string beta;
    int n = 2;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void run_verdict(const VerdictOpts& o) {
    gw::RateTriple beta = make_triple(parse_beta3(o.beta));
    auto v = gw::region_verdict(o.n, beta);
    json report = gw::verdict_json(v);
    Sink sink = make_sink("verdict", o.out, json{{"beta", o.beta}, {"n", o.n}}, o.seed);
    if (sink.enabled()) gw::save_json_file(sink.path("verdict.json"), report);
    sink.finish(report);
}

// ---- sweep -------------------------------------------------------------

struct SweepOpts {
    int n = 2;
    std::string beta1_grid;
    std::string beta2_grid;
    double horizon = 200.0;
    int replicas = 8;
    bool no_recurrence = false;
    bool no_tail = false;
    bool no_speed = false;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    std::string config;
};

void run_sweep_cmd(const SweepOpts& o) {
    gw::SweepSpec spec;
    spec.n = o.n;
    spec.beta1 = parse_doubles(o.beta1_grid, "beta1-grid");
    spec.beta2 = parse_doubles(o.beta2_grid, "beta2-grid");
    spec.protocol.horizon = o.horizon;
    spec.protocol.replicas = o.replicas;
    spec.protocol.run_recurrence = !o.no_recurrence;
    spec.protocol.run_tail = !o.no_tail;
    spec.protocol.run_speed = !o.no_speed;
    spec.seed = o.seed;
    spec.out = o.out;
    auto results = gw::run_sweep(spec, o.threads);

    json config{{"n", o.n},
                {"beta1-grid", o.beta1_grid},
                {"beta2-grid", o.beta2_grid},
                {"horizon", o.horizon},
                {"replicas", o.replicas},
                {"seed", o.seed}};
    if (o.no_recurrence) config["no-recurrence"] = true;
    if (o.no_tail) config["no-tail"] = true;
    if (o.no_speed) config["no-speed"] = true;
    Sink sink = make_sink("sweep", o.out, config, o.seed);
    if (sink.enabled()) {
        sink.outputs.push_back("sweep.csv");
        sink.outputs.push_back("sweep_manifest.json");
    }
    auto ok = std::count_if(results.begin(), results.end(),
                            [](const gw::PointResult& p) { return p.status == "ok"; });
    sink.finish(json{{"command", "sweep"},
                     {"points", results.size()},
                     {"ok", ok},
                     {"errors", static_cast<long long>(results.size()) - ok}});
}

// ---- registration ------------------------------------------------------

void add_config_opt(CLI::App* cmd, std::string& slot) {
    cmd->add_option("--config", slot, "JSON file of flag values (flags override)");
}

void register_all(CLI::App& app) {
    {
        auto o = std::make_shared<SimulateOpts>();
        auto* c = app.add_subcommand("simulate", "Run one growth trajectory");
        c->add_option("--beta", o->beta, "rates B0,B1,B2")->required();
        auto* n = c->add_option("--n", o->n, "number of sites");
        auto* bd = c->add_option("--boundary", o->boundary, "zero|periodic|infinite|zero-infinite");
        c->add_option("--init", o->init, "initial configuration, e.g. zero:2,5,3")
            ->excludes(n)
            ->excludes(bd);
        c->add_option("--horizon", o->horizon, "simulated time")->required();
        c->add_option("--snapshots", o->snapshots, "snapshot spacing (0: final state only)");
        c->add_option("--engine", o->engine, "poisson|gillespie");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_simulate(*o); });
    }
    {
        auto o = std::make_shared<CoupleOpts>();
        auto* c = app.add_subcommand("couple", "Drive two processes by shared randomness");
        c->add_option("--beta", o->beta, "rates B0,B1,B2 (monotone)")->required();
        c->add_option("--beta-alt", o->beta_alt, "second participant rates (default: same)");
        auto* n = c->add_option("--n", o->n, "sites of the first participant");
        c->add_option("--n-alt", o->n_alt, "sites of the second participant (default: same)");
        auto* bd = c->add_option("--boundary", o->boundary, "zero|periodic|infinite|zero-infinite");
        c->add_option("--init", o->init, "first initial configuration")->excludes(n)->excludes(bd);
        c->add_option("--init-alt", o->init_alt, "second initial configuration");
        c->add_option("--horizon", o->horizon, "simulated time")->required();
        c->add_option("--snapshots", o->snapshots, "snapshot spacing (0: final state only)");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_couple(*o); });
    }
    {
        auto o = std::make_shared<SpeedOpts>();
        auto* c = app.add_subcommand("speed", "Estimate per-site growth speeds");
        c->add_option("--beta", o->beta, "rates B0,B1,B2")->required();
        auto* n = c->add_option("--n", o->n, "number of sites");
        auto* bd = c->add_option("--boundary", o->boundary, "zero|periodic|infinite|zero-infinite");
        c->add_option("--init", o->init, "initial configuration")->excludes(n)->excludes(bd);
        c->add_option("--horizon", o->horizon, "simulated time per replica")->required();
        c->add_option("--replicas", o->replicas, "independent replicas");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--threads", o->threads, "worker threads (results independent of K)");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_speed(*o); });
    }
    {
        auto o = std::make_shared<TailOpts>();
        auto* c = app.add_subcommand("tail", "Fit the geometric tail of one shape coordinate");
        c->add_option("--beta", o->beta, "rates B0,B1,B2")->required();
        auto* n = c->add_option("--n", o->n, "number of sites");
        auto* bd = c->add_option("--boundary", o->boundary, "zero|periodic|infinite|zero-infinite");
        c->add_option("--init", o->init, "initial configuration")->excludes(n)->excludes(bd);
        c->add_option("--coordinate", o->coordinate, "shape coordinate (default n/2)");
        c->add_option("--horizon", o->horizon, "largest horizon (uses T/4,T/2,T)");
        c->add_option("--horizons", o->horizons, "explicit comma-separated horizons");
        c->add_option("--k-grid", o->k_grid, "comma-separated levels");
        c->add_option("--replicas", o->replicas, "independent replicas");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--threads", o->threads, "worker threads (results independent of K)");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_tail(*o); });
    }
    {
        auto o = std::make_shared<CombOpts>();
        auto* c = app.add_subcommand("comb", "Enumerate or classify comb speed patterns");
        c->add_option("--beta", o->beta, "rates B0,B1,B2")->required();
        c->add_option("--n", o->n, "number of sites");
        c->add_option("--case", o->case_name, "e1|e2|e3")->required();
        c->add_flag("--enumerate", o->enumerate_only, "list the candidate set, no simulation");
        c->add_option("--horizon", o->horizon, "simulated time per replica");
        c->add_option("--replicas", o->replicas, "independent replicas");
        c->add_option("--tol", o->tol, "match tolerance (default 0.05*max(beta))");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--threads", o->threads, "worker threads (results independent of K)");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_comb(*o); });
    }
    {
        auto o = std::make_shared<DtildeOpts>();
        auto* c = app.add_subcommand("dtilde", "Bracket the critical decay rate of the auxiliary process");
        c->add_option("--beta", o->beta, "rates B0,B1,B2 (B2 ignored, aux uses B1 twice)")
            ->required();
        c->add_option("--n", o->n, "number of sites");
        c->add_option("--grid", o->grid, "comma-separated decay-rate grid")->required();
        c->add_option("--horizon", o->horizon, "largest horizon (uses T/3,2T/3,T)");
        c->add_option("--horizons", o->horizons, "explicit comma-separated horizons");
        c->add_option("--replicas", o->replicas, "independent replicas");
        c->add_option("--seed", o->seed, "RNG seed");
        c->add_option("--threads", o->threads, "worker threads (results independent of K)");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_dtilde(*o); });
    }
    {
        auto o = std::make_shared<ExactOpts>();
        auto* c = app.add_subcommand("exact", "Closed forms and truncated stationary solves");
        c->add_option("--beta", o->beta, "rates B0,B1,B2 (unused entries may be 0)")->required();
        o->v2 = c->add_flag("--v2", "two-site speed 2*B0*B1/(B0+B1)");
        o->v2inf = c->add_flag("--v2inf", "infinite-boundary speed 2*B1*B2/(B1+B2)");
        o->mu = c->add_option("--mu", o->mu_index, "stationary mass of shape i (n=2)");
        o->transience = c->add_flag("--transience-b", "transience threshold B(B0,B2)");
        o->vitesse = c->add_option("--vitesse", o->vitesse_eps, "speed threshold at epsilon");
        o->solve = c->add_flag("--solve", "solve the truncated chain");
        c->add_option("--n", o->n, "sites for --solve (2 or 3)");
        c->add_option("--truncation", o->truncation, "half-width M of the truncation box");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_exact(*o); });
    }
    {
        auto o = std::make_shared<VerdictOpts>();
        auto* c = app.add_subcommand("verdict", "Evaluate the proved-region predicates");
        c->add_option("--beta", o->beta, "rates B0,B1,B2")->required();
        c->add_option("--n", o->n, "number of sites")->required();
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_verdict(*o); });
    }
    {
        auto o = std::make_shared<SweepOpts>();
        auto* c = app.add_subcommand("sweep", "Scan a (beta1,beta2) grid at beta0 = 1");
        c->add_option("--n", o->n, "number of sites")->required();
        c->add_option("--beta1-grid", o->beta1_grid, "comma-separated beta1 values")->required();
        c->add_option("--beta2-grid", o->beta2_grid, "comma-separated beta2 values")->required();
        c->add_option("--horizon", o->horizon, "simulated time per estimator");
        c->add_option("--replicas", o->replicas, "replicas per estimator");
        c->add_flag("--no-recurrence", o->no_recurrence, "skip return statistics");
        c->add_flag("--no-tail", o->no_tail, "skip tail fits");
        c->add_flag("--no-speed", o->no_speed, "skip speed estimates");
        c->add_option("--seed", o->seed, "global seed (per-point seeds are coordinate hashes)");
        c->add_option("--threads", o->threads, "worker threads (results independent of K)");
        c->add_option("--out", o->out, "output directory");
        add_config_opt(c, o->config);
        c->callback([o] { run_sweep_cmd(*o); });
    }
}

// Splices `--key value` tokens from a --config JSON file right after the
// subcommand name, so explicitly passed flags take precedence.
std::string config_token(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> tokens(argv + 1, argv + argc);
    size_t sub = tokens.size();
    for (size_t i = 0; i < tokens.size(); ++i)
        if (!tokens[i].empty() && tokens[i][0] != '-') {
            sub = i;
            break;
        }
    if (sub == tokens.size()) return tokens;

    std::string cfg_path;
    for (size_t i = sub + 1; i < tokens.size(); ++i) {
        if (tokens[i] == "--config" && i + 1 < tokens.size())
            cfg_path = tokens[i + 1];
        else if (tokens[i].rfind("--config=", 0) == 0)
            cfg_path = tokens[i].substr(9);
    }
    if (cfg_path.empty()) return tokens;

    json cfg = gw::load_json_file(cfg_path);
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    std::vector<std::string> injected;
    for (auto& [key, value] : cfg.items()) {
        if (key == "config") throw std::invalid_argument("config file cannot set config");
        if (value.is_null()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back("--" + key);
            continue;
        }
        injected.push_back("--" + key);
        if (value.is_array()) {
            std::string joined;
            for (size_t i = 0; i < value.size(); ++i)
                joined += (i > 0 ? "," : "") + config_token(value[i]);
            injected.push_back(joined);
        } else {
            injected.push_back(config_token(value));
        }
    }
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(sub) + 1, injected.begin(),
                  injected.end());
    return tokens;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gwlab: Gates-Westcott crystal growth laboratory"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", gw::tool_version);
    app.require_subcommand(1);
    register_all(app);

    try {
        auto tokens = expand_config(argc, argv);
        std::reverse(tokens.begin(), tokens.end());
        app.parse(tokens);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
