#include "gw/sweep.hpp"

#include "gw/analysis.hpp"
#include "gw/engine.hpp"
#include "gw/io.hpp"
#include "gw/parallel.hpp"
#include "gw/rng.hpp"
#include "gw/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gw {

namespace {

constexpr int occupation_radius = 5;

bool in_box(const std::vector<std::int64_t>& h) {
    return std::all_of(h.begin(), h.end(),
                       [](std::int64_t v) { return std::llabs(v) <= occupation_radius; });
}

bool is_zero(const std::vector<std::int64_t>& h) {
    return std::all_of(h.begin(), h.end(), [](std::int64_t v) { return v == 0; });
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string sanitize_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

void check_grid(const std::vector<double>& g, const char* what) {
    if (g.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
    for (size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0))
            throw std::invalid_argument(std::string(what) + " grid needs positive rates");
        if (i > 0 && !(g[i] > g[i - 1]))
            throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
    }
}

std::string point_key(int n, double beta1, double beta2) {
    return std::to_string(n) + ',' + fmt_double(beta1) + ',' + fmt_double(beta2);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Rebuilds a PointResult from a cached CSV row; the verdict block is
// recomputed (it is an exact function of the coordinates) and the
// simulation-derived fields are taken from the row text.
PointResult parse_csv_row(const std::string& line) {
    auto f = split_fields(line);
    if (f.size() != 16) throw std::runtime_error("malformed sweep row: " + line);
    PointResult p;
    p.n = std::stoi(f[0]);
    p.beta1 = std::stod(f[1]);
    p.beta2 = std::stod(f[2]);
    p.verdict = region_verdict(p.n, RateTriple(1.0, p.beta1, p.beta2));
    if (!f[10].empty()) {
        RecurrenceStats st;
        st.returns = std::stoi(f[10]);
        st.last_return = std::stod(f[11]);
        st.occupation = std::stod(f[12]);
        p.recurrence = st;
    }
    if (!f[13].empty()) p.alpha_hat = std::stod(f[13]);
    if (!f[14].empty()) p.speed_mean = std::stod(f[14]);
    p.status = f[15];
    return p;
}

}  // namespace

RecurrenceStats recurrence_statistics(const std::vector<std::vector<std::int64_t>>& shapes,
                                      const std::vector<double>& times, double horizon) {
    require(!shapes.empty() && shapes.size() == times.size(),
            "path needs matching shapes and times");
    require(times.front() == 0.0, "path must start at time 0");
    require(horizon > 0.0, "recurrence horizon must be positive");
    for (size_t i = 0; i + 1 < times.size(); ++i)
        require(times[i] < times[i + 1], "path times must be strictly increasing");
    require(times.back() <= horizon, "path times must not exceed the horizon");

    RecurrenceStats st;
    double box_time = 0.0;
    for (size_t i = 0; i < shapes.size(); ++i) {
        double t1 = i + 1 < times.size() ? times[i + 1] : horizon;
        if (in_box(shapes[i])) box_time += t1 - times[i];
        if (i > 0 && is_zero(shapes[i]) && !is_zero(shapes[i - 1])) {
            ++st.returns;
            st.last_return = times[i];
        }
    }
    st.occupation = box_time / horizon;
    return st;
}

RecurrenceStats recurrence_statistics(const RateTriple& beta, const Configuration& cfg0,
                                      double horizon, std::uint64_t seed) {
    require(horizon > 0.0, "recurrence horizon must be positive");
    PoissonSimulator sim(beta, cfg0, seed);
    Shape h = shape_of(sim.state());

    RecurrenceStats st;
    double box_time = 0.0;
    double segment_start = 0.0;
    bool boxed = in_box(h.diffs);
    Event ev;
    while (sim.step(horizon, &ev)) {
        if (!ev.accepted) continue;
        if (boxed) box_time += ev.time - segment_start;
        segment_start = ev.time;
        bool was_zero = is_zero(h.diffs);
        shape_step_in_place(h, ev.site);
        if (!was_zero && is_zero(h.diffs)) {
            ++st.returns;
            st.last_return = ev.time;
        }
        boxed = in_box(h.diffs);
    }
    if (boxed) box_time += horizon - segment_start;
    st.occupation = box_time / horizon;
    return st;
}

std::uint64_t sweep_point_seed(std::uint64_t global_seed, int n, double beta1, double beta2) {
    std::uint64_t s = derive_seed(global_seed, static_cast<std::uint64_t>(n));
    s = derive_seed(s, std::bit_cast<std::uint64_t>(beta1));
    return derive_seed(s, std::bit_cast<std::uint64_t>(beta2));
}

std::string sweep_csv_header() {
    return "n,beta1,beta2,verdict,cond_prior,cond_a,cond_b,cond_c,comb_case,"
           "transience_B,returns,last_return,occupation,alpha_hat,speed_mean,status";
}

std::string sweep_csv_row(const PointResult& p) {
    std::ostringstream out;
    auto flag = [](bool b) { return b ? '1' : '0'; };
    out << p.n << ',' << fmt_double(p.beta1) << ',' << fmt_double(p.beta2) << ','
        << verdict_label_name(p.verdict.label) << ',' << flag(p.verdict.cond_prior) << ','
        << flag(p.verdict.cond_a) << ',' << flag(p.verdict.cond_b) << ','
        << flag(p.verdict.cond_c) << ',' << p.verdict.comb_case << ',';
    if (std::isfinite(p.verdict.transience_B)) out << fmt_double(p.verdict.transience_B);
    out << ',';
    if (p.recurrence) {
        out << p.recurrence->returns << ',' << fmt_double(p.recurrence->last_return) << ','
            << fmt_double(p.recurrence->occupation);
    } else {
        out << ",,";
    }
    out << ',';
    if (p.alpha_hat) out << fmt_double(*p.alpha_hat);
    out << ',';
    if (p.speed_mean) out << fmt_double(*p.speed_mean);
    out << ',' << p.status;
    return out.str();
}

PointResult run_sweep_point(const SweepSpec& spec, double beta1, double beta2) {
    PointResult p;
    p.n = spec.n;
    p.beta1 = beta1;
    p.beta2 = beta2;
    auto t0 = std::chrono::steady_clock::now();
    try {
        RateTriple beta(1.0, beta1, beta2);
        p.verdict = region_verdict(spec.n, beta);
        std::uint64_t seed = sweep_point_seed(spec.seed, spec.n, beta1, beta2);
        Configuration cfg0 = flat_configuration(spec.n, Boundary::Zero);
        const SweepProtocol& pr = spec.protocol;

        if (pr.run_recurrence)
            p.recurrence = recurrence_statistics(beta, cfg0, pr.horizon, derive_seed(seed, 1));

        if (pr.run_tail && spec.n >= 2) {
            std::vector<double> horizons = {pr.horizon / 4.0, pr.horizon / 2.0, pr.horizon};
            std::vector<int> k_grid = {1, 2, 3, 4, 5, 6};
            TailFit fit = fit_tail(beta, cfg0, std::max(1, spec.n / 2), horizons, k_grid,
                                   std::max(2, pr.replicas), derive_seed(seed, 2));
            if (!fit.tail_too_light) p.alpha_hat = fit.alpha_hat;
        }

        if (pr.run_speed) {
            SpeedEstimate est = estimate_speeds(beta, cfg0, pr.horizon, std::max(2, pr.replicas),
                                                derive_seed(seed, 3));
            p.speed_mean = std::accumulate(est.speed.begin(), est.speed.end(), 0.0) /
                           static_cast<double>(est.speed.size());
        }
    } catch (const std::exception& e) {
        p.status = sanitize_status(std::string("error: ") + e.what());
    }
    p.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return p;
}

std::vector<PointResult> run_sweep(const SweepSpec& spec, int threads) {
    require(spec.n >= 1, "sweep needs n >= 1");
    require(spec.protocol.horizon > 0.0, "sweep horizon must be positive");
    require(spec.protocol.replicas >= 2, "sweep needs at least two replicas");
    check_grid(spec.beta1, "beta1");
    check_grid(spec.beta2, "beta2");

    struct Cell {
        double b1;
        double b2;
    };
    std::vector<Cell> cells;
    cells.reserve(spec.beta1.size() * spec.beta2.size());
    for (double b1 : spec.beta1)
        for (double b2 : spec.beta2) cells.push_back({b1, b2});

    namespace fs = std::filesystem;
    std::map<std::string, std::string> cached;  // point key -> full CSV row
    fs::path csv_path;
    if (!spec.out.empty()) {
        fs::create_directories(spec.out);
        csv_path = fs::path(spec.out) / "sweep.csv";
        if (fs::exists(csv_path)) {
            std::ifstream in(csv_path);
            std::string line;
            bool first = true;
            while (std::getline(in, line)) {
                if (first) {
                    first = false;
                    continue;
                }
                if (line.empty()) continue;
                size_t a = line.find(',');
                size_t b = a == std::string::npos ? a : line.find(',', a + 1);
                size_t c = b == std::string::npos ? b : line.find(',', b + 1);
                if (c == std::string::npos) continue;
                cached.emplace(line.substr(0, c), line);
            }
        }
    }

    std::vector<std::string> rows(cells.size());
    std::vector<PointResult> results(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
        const size_t u = static_cast<size_t>(i);
        auto it = cached.find(point_key(spec.n, cells[u].b1, cells[u].b2));
        if (it != cached.end()) {
            rows[u] = it->second;
            results[u] = parse_csv_row(it->second);
            return;
        }
        PointResult p = run_sweep_point(spec, cells[u].b1, cells[u].b2);
        rows[u] = sweep_csv_row(p);
        results[u] = std::move(p);
    });

    if (!spec.out.empty()) {
        {
            std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open for writing: " + csv_path.string());
            out << sweep_csv_header() << '\n';
            for (const std::string& row : rows) {
                out << row << '\n';
                out.flush();
            }
        }
        nlohmann::json cfg;
        cfg["n"] = spec.n;
        cfg["beta0"] = 1.0;
        cfg["beta1_grid"] = spec.beta1;
        cfg["beta2_grid"] = spec.beta2;
        cfg["horizon"] = spec.protocol.horizon;
        cfg["replicas"] = spec.protocol.replicas;
        cfg["run_recurrence"] = spec.protocol.run_recurrence;
        cfg["run_tail"] = spec.protocol.run_tail;
        cfg["run_speed"] = spec.protocol.run_speed;
        nlohmann::json manifest;
        manifest["spec"] = cfg;
        manifest["seed"] = spec.seed;
        manifest["version"] = tool_version;
        save_json_file((fs::path(spec.out) / "sweep_manifest.json").string(), manifest);
    }
    return results;
}

}  // namespace gw
