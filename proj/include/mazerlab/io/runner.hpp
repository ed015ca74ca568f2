// runner.hpp - scenario dispatch, worker pool and atomic artifact output.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mazerlab/claimed.hpp"
#include "mazerlab/io/config.hpp"
#include "mazerlab/io/csv.hpp"
#include "mazerlab/io/observables.hpp"
#include "mazerlab/io/svg.hpp"
#include "mazerlab/propagator.hpp"
#include "mazerlab/stationary.hpp"
#include "mazerlab/verifier.hpp"

namespace mazerlab::io {

inline constexpr const char* kVersion = "1.0.0";

inline const char* unit_system_description() {
    return "hbar = 1, 2M = 1 (kinetic operator -d^2/dz^2, plane wave e^{ikz} has energy k^2), "
           "gamma^2 = lambda; energies lambda, Delta = omega0 - omega and omega share one unit, "
           "lengths are in the inverse unit of k; interaction picture drops omega (n + 1/2)";
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Worker count: explicit request, then MAZERLAB_JOBS, then the number of
// processors.
inline std::size_t resolve_jobs(std::optional<std::size_t> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("MAZERLAB_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError("MAZERLAB_JOBS", "must be a positive integer, got '" + std::string(env) + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates fn(0..count-1) on up to `jobs` threads. Results are ordered by
// index. If any call throws, the exception of the lowest index is rethrown
// after all workers finish.
template <class T>
std::vector<T> parallel_map(std::size_t count, std::size_t jobs, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct Artifact {
    std::string name;  // file name inside the output directory
    std::string content;
    std::size_t rows = 0;  // data rows for CSV, 0 otherwise
};

struct RunResult {
    std::vector<std::filesystem::path> outputs;  // data files, then the manifest
    std::filesystem::path manifest;
    json summary;
    double wall_seconds = 0.0;
};

struct RunOptions {
    std::optional<std::size_t> jobs;
};

namespace detail {

inline const char* channel_name(Channel c) { return c == Channel::plus ? "plus" : "minus"; }

inline std::vector<Artifact> run_residual(const RunConfig& c, std::size_t jobs, json& summary) {
    const ModelParams p = c.params();
    struct Item {
        double k;
        int n;
    };
    std::vector<Item> items;
    for (double k : c.k)
        for (const auto& s : c.sectors) items.push_back({k, s.n});
    const auto reports = parallel_map<ResidualReport>(
        items.size(), jobs, [&](std::size_t i) { return claimed_residual(items[i].k, items[i].n, p); });

    CsvTable t({"k", "n", "region", "channel", "window_start", "window_end", "residual_norm", "residual_norm_alt"});
    double worst = 0.0, worst_alt = 0.0;
    for (const auto& rep : reports) {
        for (const auto& e : rep.entries)
            t.add(CsvTable::Row() << rep.k << rep.n << to_string(e.region) << channel_name(e.channel) << e.window_start
                                  << e.window_end << e.norm << e.norm_alt);
        worst = std::max(worst, rep.max_norm());
        worst_alt = std::max(worst_alt, rep.max_norm_alt());
    }
    summary["max_residual_norm"] = worst;
    summary["max_residual_norm_alt"] = worst_alt;
    summary["energy_convention"] = "primary E = k^2 + Delta/2, alternate E = k^2";
    return {{c.output.prefix + ".csv", t.text(), t.rows()}};
}

inline std::vector<Artifact> run_residual_sweep(const RunConfig& c, std::size_t jobs, json& summary) {
    const ModelParams p = c.params();
    const double k = c.k.front();
    const int n = c.sectors.front().n;
    const auto reports = parallel_map<ResidualReport>(c.deltas.size(), jobs, [&](std::size_t i) {
        return claimed_residual(k, n, make_params(p.lambda(), c.deltas[i], p.omega(), p.cavity_length()));
    });

    CsvTable t({"delta", "region", "channel", "residual_norm", "residual_norm_alt"});
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const auto& e : reports[i].entries)
            t.add(CsvTable::Row() << c.deltas[i] << to_string(e.region) << channel_name(e.channel) << e.norm
                                  << e.norm_alt);
        const double d = std::abs(c.deltas[i]), m = reports[i].max_norm();
        if (d > 0.0 && m > 0.0) {
            xs.push_back(d);
            ys.push_back(m);
        }
    }
    summary["k"] = k;
    summary["n"] = n;
    if (xs.size() >= 2) summary["loglog_slope"] = loglog_slope(xs, ys);
    std::vector<Artifact> out{{c.output.prefix + ".csv", t.text(), t.rows()}};
    if (c.output.svg) {
        PlotSeries s{"max residual norm", {}, {}};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            s.x.push_back(std::log10(xs[i]));
            s.y.push_back(std::log10(ys[i]));
        }
        out.push_back({c.output.prefix + ".svg",
                       render_line_plot({s}, {"Residual of the claimed state vs detuning", "log10 |Delta|",
                                              "log10 max residual norm"})});
    }
    return out;
}

inline std::vector<Artifact> run_scattering(const RunConfig& c, std::size_t jobs, json& summary, bool resonant) {
    const ModelParams p = c.params();
    const ModeFunction mode = c.mode_function();
    struct Item {
        double k;
        PhotonSector sector;
    };
    struct Row {
        ScatteringProbabilities pr;
        double condition = 0.0;
        bool exit_open = true;
    };
    std::vector<Item> items;
    for (double k : c.k)
        for (const auto& s : c.sectors) items.push_back({k, s});
    const auto rows = parallel_map<Row>(items.size(), jobs, [&](std::size_t i) {
        if (resonant) return Row{resonant_emission_probability(items[i].k, items[i].sector.n, p), 0.0, true};
        const StationarySolution sol = stationary_scatter(items[i].k, items[i].sector.n, p, mode);
        return Row{flux_probabilities(sol), sol.condition_number, sol.exit_open()};
    });

    std::vector<std::string> header{"k", "n", "weight", "R_e", "R_g", "T_e", "T_g", "emission", "total"};
    if (!resonant) header.insert(header.end(), {"condition_number", "exit_open"});
    CsvTable t(header);
    double worst_unitarity = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& r = rows[i];
        CsvTable::Row row;
        row << items[i].k << items[i].sector.n << items[i].sector.weight << r.pr.reflect_e << r.pr.reflect_g
            << r.pr.transmit_e << r.pr.transmit_g << r.pr.emission() << r.pr.total();
        if (!resonant) row << r.condition << r.exit_open;
        t.add(row);
        worst_unitarity = std::max(worst_unitarity, std::abs(r.pr.total() - 1.0));
    }
    summary["max_unitarity_defect"] = worst_unitarity;
    std::vector<Artifact> out{{c.output.prefix + ".csv", t.text(), t.rows()}};
    if (c.output.svg && c.k.size() > 1) {
        std::vector<PlotSeries> series;
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
        for (std::size_t s = 0; s < c.sectors.size(); ++s) {
            PlotSeries ps{"n = " + std::to_string(c.sectors[s].n), {}, {}, colors[s % 5]};
            for (std::size_t i = 0; i < items.size(); ++i)
                if (items[i].sector.n == c.sectors[s].n) {
                    ps.x.push_back(items[i].k);
                    ps.y.push_back(rows[i].pr.emission());
                }
            series.push_back(std::move(ps));
        }
        out.push_back({c.output.prefix + ".svg",
                       render_line_plot(series, {"Emission probability R_g + T_g", "k", "emission", 0.0, 1.0})});
    }
    return out;
}

inline std::vector<Artifact> run_audit(const RunConfig& c, json& summary) {
    const ModelParams p = c.params();
    CsvTable t({"delta", "n", "bare_inside", "bare_outside", "dressed_inside", "dressed_outside",
                "dressed_outside_expected"});
    double worst = 0.0;
    std::vector<SeparabilityAudit> audits;
    for (const auto& s : c.sectors) {
        audits.push_back(separability_audit(s.n, p, c.delta_grid));
        for (const auto& r : audits.back().rows) {
            t.add(CsvTable::Row() << r.delta << s.n << r.bare_inside << r.bare_outside << r.dressed_inside
                                  << r.dressed_outside << r.dressed_outside_expected);
            worst = std::max(worst, std::abs(r.dressed_outside - r.dressed_outside_expected));
        }
    }
    summary["max_dressed_outside_deviation"] = worst;
    std::vector<Artifact> out{{c.output.prefix + ".csv", t.text(), t.rows()}};
    if (c.output.svg) {
        const auto& a = audits.front();
        PlotSeries bi{"bare inside", {}, {}, "#1f77b4"}, bo{"bare outside", {}, {}, "#2ca02c"},
            di{"dressed inside", {}, {}, "#9467bd"}, dout{"dressed outside", {}, {}, "#d62728"};
        for (const auto& r : a.rows) {
            for (auto* s : {&bi, &bo, &di, &dout}) s->x.push_back(r.delta);
            bi.y.push_back(r.bare_inside);
            bo.y.push_back(r.bare_outside);
            di.y.push_back(r.dressed_inside);
            dout.y.push_back(r.dressed_outside);
        }
        out.push_back({c.output.prefix + ".svg",
                       render_line_plot({bi, bo, di, dout}, {"Off-diagonal coupling, sector n = " + std::to_string(a.n),
                                                             "Delta", "|off-diagonal element|"})});
    }
    return out;
}

inline std::vector<Artifact> run_propagate(const RunConfig& c, std::size_t jobs, json& summary) {
    const ModelParams p = c.params();
    const ModeFunction mode = c.mode_function();
    const PropagationPlan plan = plan_propagation(c);
    PropagateOptions options;
    options.record_every = plan.record_every;
    options.absorber = c.absorber;

    struct SectorRun {
        std::vector<ObservableRecord> records;
        bool step_above_dz2 = false;
        double max_norm_drift = 0.0;
        double boundary = 0.0;
    };
    const auto runs = parallel_map<SectorRun>(c.sectors.size(), jobs, [&](std::size_t s) {
        const WavePacketSpec spec{c.packet.k0, c.packet.sigma_k, plan.z0, c.sectors[s].n};
        TwoChannelField f0;
        try {
            f0 = init_wavepacket(spec, plan.grid);
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.field() == "grid" ? "grid" : "packet." + e.field(), e.what());
        }
        if (c.basis == Basis::dressed) f0 = f0.to_basis(Basis::dressed, dressed_angle(spec.n, p));
        Trajectory tr = propagate(f0, p, mode, plan.dt, plan.steps, options);
        return SectorRun{std::move(tr.records), tr.step_above_dz2, tr.max_norm_drift,
                         boundary_density(tr.final_field)};
    });

    std::vector<std::vector<ObservableRecord>> trajectories;
    for (const auto& r : runs) trajectories.push_back(r.records);
    const ObservableSeries series = aggregate_inversion(trajectories, c.weights());

    CsvTable t({"t", "norm", "P_e", "P_g", "inversion"});
    for (std::size_t i = 0; i < series.size(); ++i)
        t.add(CsvTable::Row() << series.t[i] << series.norm[i] << series.p_e[i] << series.p_g[i]
                              << series.inversion[i]);
    CsvTable per({"t", "n", "norm", "P_e", "P_g", "inversion"});
    for (std::size_t s = 0; s < runs.size(); ++s)
        for (const auto& r : runs[s].records)
            per.add(CsvTable::Row() << r.t << c.sectors[s].n << r.norm << r.p_e << r.p_g << r.inversion);

    json warnings = json::array();
    double drift = 0.0, boundary = 0.0;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        drift = std::max(drift, runs[s].max_norm_drift);
        boundary = std::max(boundary, runs[s].boundary);
        if (runs[s].step_above_dz2)
            warnings.push_back("dt >= dz^2 in sector " + std::to_string(c.sectors[s].n) +
                               ": short-wavelength components are not resolved in time");
    }
    if (boundary > 1e-8) warnings.push_back("probability density at the box walls reached " + format_double(boundary));
    summary["grid"] = {{"z_min", plan.grid.z_min()}, {"z_max", plan.grid.z_max()}, {"dz", plan.grid.dz()},
                       {"points", plan.grid.size()}};
    summary["z0"] = plan.z0;
    summary["dt"] = plan.dt;
    summary["steps"] = plan.steps;
    summary["record_every"] = plan.record_every;
    summary["max_norm_drift"] = drift;
    summary["final_inversion"] = series.inversion.back();
    summary["warnings"] = warnings;

    std::vector<Artifact> out{{c.output.prefix + ".csv", t.text(), t.rows()},
                              {c.output.prefix + "_sectors.csv", per.text(), per.rows()}};
    if (c.output.svg) {
        PlotSeries w{"W(t)", series.t, series.inversion, "#d62728"};
        out.push_back({c.output.prefix + ".svg",
                       render_line_plot({w}, {"Atomic inversion W(t) = P_e - P_g", "t", "W", -1.0, 1.0})});
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output.dir", "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw ConfigError("output.dir", "failed writing '" + path.string() + "'");
}

// Writes every artifact to a temporary name and renames it into place.
// On failure every file this call created is removed.
inline std::vector<std::filesystem::path> commit_artifacts(const std::filesystem::path& dir,
                                                           const std::vector<Artifact>& artifacts) {
    namespace fs = std::filesystem;
    std::vector<fs::path> staged, placed;
    try {
        for (const auto& a : artifacts) {
            const fs::path tmp = dir / (a.name + ".tmp");
            staged.push_back(tmp);
            write_file(tmp, a.content);
        }
        for (std::size_t i = 0; i < artifacts.size(); ++i) {
            const fs::path final_path = dir / artifacts[i].name;
            fs::rename(staged[i], final_path);
            placed.push_back(final_path);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : staged) fs::remove(p, ec);
        for (const auto& p : placed) fs::remove(p, ec);
        throw;
    }
    return placed;
}

}  // namespace detail

// Computes every artifact of the scenario in memory, then writes them and
// the manifest. Nothing is left on disk when the computation fails.
inline RunResult run(const RunConfig& config, const RunOptions& options = {}) {
    namespace fs = std::filesystem;
    const auto start = std::chrono::steady_clock::now();
    const std::size_t jobs = resolve_jobs(options.jobs);

    const fs::path dir(config.output.dir);
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw ConfigError("output.dir", "cannot create directory '" + dir.string() + "'");
        const fs::path probe = dir / (config.output.prefix + ".probe.tmp");
        detail::write_file(probe, "");
        fs::remove(probe, ec);
    }

    json summary = json::object();
    std::vector<Artifact> artifacts;
    switch (config.scenario) {
        case Scenario::residual: artifacts = detail::run_residual(config, jobs, summary); break;
        case Scenario::residual_sweep: artifacts = detail::run_residual_sweep(config, jobs, summary); break;
        case Scenario::stationary: artifacts = detail::run_scattering(config, jobs, summary, false); break;
        case Scenario::resonant_probabilities: artifacts = detail::run_scattering(config, jobs, summary, true); break;
        case Scenario::audit: artifacts = detail::run_audit(config, summary); break;
        case Scenario::propagate: artifacts = detail::run_propagate(config, jobs, summary); break;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json resolved = to_json(config);
    json manifest;
    manifest["mazerlab_version"] = kVersion;
    manifest["scenario"] = to_string(config.scenario);
    manifest["config"] = resolved;
    // The output directory does not influence any result, so it is left
    // out of the hash.
    json hashed = resolved;
    hashed["output"].erase("dir");
    manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a64(hashed.dump()));
    manifest["unit_system"] = unit_system_description();
    manifest["module_versions"] = {{"model-core", kVersion},
                                   {"analytic-claimed", kVersion},
                                   {"coupled-solver", kVersion},
                                   {"verifier", kVersion},
                                   {"cli-io", kVersion}};
    manifest["jobs"] = jobs;
    manifest["wall_time_seconds"] = wall;
    manifest["summary"] = summary;
    json outputs = json::array();
    for (const auto& a : artifacts) {
        json o = {{"file", a.name}, {"bytes", a.content.size()}, {"sha_fnv1a64", hex64(fnv1a64(a.content))}};
        if (a.name.ends_with(".csv")) o["rows"] = a.rows;
        outputs.push_back(o);
    }
    manifest["outputs"] = outputs;
    artifacts.push_back({config.output.prefix + "_manifest.json", manifest.dump(2) + "\n", 0});

    RunResult result;
    result.outputs = detail::commit_artifacts(dir, artifacts);
    result.manifest = result.outputs.back();
    result.summary = summary;
    result.wall_seconds = wall;
    return result;
}

}  // namespace mazerlab::io
