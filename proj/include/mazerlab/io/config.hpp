// config.hpp - JSON run configuration: strict schema, defaults, overrides.
//
// Units throughout: hbar = 1 and 2M = 1, so the kinetic operator is
// -d^2/dz^2 and a plane wave e^{ikz} has energy k^2. Lengths are in the
// same unit as 1/k; lambda, Delta and omega are energies.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mazerlab/errors.hpp"
#include "mazerlab/model.hpp"
#include "mazerlab/propagator.hpp"

namespace mazerlab::io {

using json = nlohmann::json;

// Any problem with the configuration file or its values. `line()` and
// `column()` are set for syntax errors (1-based, 0 when unknown).
class ConfigError : public InvalidParameter {
public:
    ConfigError(std::string field, const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : InvalidParameter(std::move(field), what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

enum class Scenario { residual, residual_sweep, stationary, propagate, audit, resonant_probabilities };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string>> names = {
        {Scenario::residual, "residual"},     {Scenario::residual_sweep, "residual-sweep"},
        {Scenario::stationary, "stationary"}, {Scenario::propagate, "propagate"},
        {Scenario::audit, "audit"},           {Scenario::resonant_probabilities, "resonant-probabilities"}};
    return names;
}

inline std::string to_string(Scenario s) {
    for (const auto& [v, name] : scenario_names())
        if (v == s) return name;
    return "?";
}

struct PacketConfig {
    double k0 = 1.0;
    double sigma_k = 0.05;
    std::optional<double> z0;  // default -6/sigma_k
};

struct GridConfig {
    std::optional<double> z_min;  // default fitted to the packet and duration
    std::optional<double> z_max;
    double dz = 0.02;
};

struct OutputConfig {
    std::string dir = ".";
    std::string prefix;  // default: scenario name
    bool svg = false;
};

struct RunConfig {
    Scenario scenario = Scenario::residual;
    double lambda = 1.0;
    double delta = 0.0;
    double omega = 0.0;
    double cavity_length = 1.0;
    std::vector<PhotonSector> sectors{{0, 1.0}};
    std::vector<double> k{1.0};
    std::vector<double> deltas;      // residual-sweep
    std::vector<double> delta_grid;  // audit
    PacketConfig packet;
    GridConfig grid;
    double dt = 0.01;
    std::optional<std::size_t> steps;
    std::size_t record_every = 0;  // 0: about 200 records per run
    Basis basis = Basis::bare;
    ModeFunction::Kind mode = ModeFunction::Kind::mesa;
    AbsorbingLayer absorber;
    OutputConfig output;
    std::uint64_t seed = 0;  // reserved; no scenario draws random numbers

    ModelParams params() const { return make_params(lambda, delta, omega, cavity_length); }
    ModeFunction mode_function() const {
        return mode == ModeFunction::Kind::zero ? ModeFunction::zero() : ModeFunction::mesa(cavity_length);
    }
    std::vector<double> weights() const {
        std::vector<double> w;
        for (const auto& s : sectors) w.push_back(s.weight);
        return w;
    }
};

// Concrete propagation set-up derived from a config.
struct PropagationPlan {
    Grid grid;
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t record_every = 0;
    double z0 = 0.0;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (std::tolower(a[i - 1]) == std::tolower(b[j - 1]) ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline const std::map<std::string, std::string>& key_aliases() {
    static const std::map<std::string, std::string> aliases = {
        {"detuning", "delta"},        {"Delta", "delta"},         {"L", "cavity_length"},
        {"length", "cavity_length"},  {"cavity", "cavity_length"}, {"g", "lambda"},
        {"coupling", "lambda"},       {"weights", "sectors"},      {"photons", "sectors"},
        {"n_steps", "steps"},         {"nsteps", "steps"},         {"time_step", "dt"},
        {"sigma", "sigma_k"},         {"width", "sigma_k"},        {"k_0", "k0"},
        {"kz", "k"},                  {"momentum", "k"},           {"detunings", "deltas"},
        {"jobs", "--jobs (command line)"},
    };
    return aliases;
}

// Closest allowed key for a misspelt one: exact aliases first, then the
// smallest edit distance to an allowed key or to an alias, then a shared
// prefix of at least five characters.
inline std::string suggestion(const std::string& key, const std::vector<std::string>& allowed) {
    auto is_allowed = [&](const std::string& k) { return std::find(allowed.begin(), allowed.end(), k) != allowed.end(); };
    const auto& aliases = key_aliases();
    if (auto it = aliases.find(key); it != aliases.end() && (is_allowed(it->second) || it->second[0] == '-'))
        return it->second;
    std::string best;
    std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
    auto consider = [&](const std::string& name, const std::string& target) {
        const std::size_t d = edit_distance(key, name);
        if (d < best_d) best_d = d, best = target;
    };
    for (const auto& a : allowed) consider(a, a);
    for (const auto& [alias, target] : aliases)
        if (is_allowed(target)) consider(alias, target);
    if (!best.empty()) return best;
    for (const auto& a : allowed) {
        std::size_t common = 0;
        while (common < key.size() && common < a.size() && key[common] == a[common]) ++common;
        if (common >= 5) return a;
    }
    return best;
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
        std::string msg = "unknown key";
        const std::string hint = suggestion(key, allowed);
        if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
        throw ConfigError(prefix + key, msg);
    }
}

inline double number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

inline std::vector<double> number_list(const json& j, const std::string& field) {
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(number(j, field));
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
    } else {
        throw ConfigError(field, "expected a number or an array of numbers");
    }
    if (out.empty()) throw ConfigError(field, "must not be empty");
    return out;
}

inline std::size_t count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError(field, "expected a non-negative integer");
    return j.get<std::size_t>();
}

inline bool boolean(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
    return j.get<bool>();
}

inline std::string text(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> default_deltas() {
    std::vector<double> d;
    for (int i = 0; i <= 12; ++i) d.push_back(std::pow(10.0, -4.0 + i / 3.0));
    return d;
}

inline std::vector<double> default_delta_grid() {
    std::vector<double> d;
    for (int i = 0; i <= 100; ++i) d.push_back(-5.0 + 0.1 * i);
    return d;
}

// Byte offset (1-based, as reported by the parser) to line and column.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

// Parses JSON text; syntax errors become ConfigError with line and column.
inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw ConfigError("<json>", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                        ": " + what,
                          line, col);
    }
}

// Applies one `key=value` override. Dotted keys address nested objects;
// the value is read as JSON when it parses, else as a string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must have the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(path, "empty key segment in override");
        if (!node->is_object()) throw ConfigError(path, "override descends into a non-object value");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

// Validates a JSON document and fills defaults.
inline RunConfig config_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ConfigError("<json>", "top level must be an object");
    check_keys(doc,
               {"scenario", "lambda", "delta", "omega", "cavity_length", "sectors", "k", "deltas", "delta_grid",
                "packet", "grid", "dt", "steps", "record_every", "basis", "mode", "absorber", "output", "seed"},
               "");

    RunConfig c;
    if (!doc.contains("scenario")) throw ConfigError("scenario", "missing; one of residual, residual-sweep, "
                                                                 "stationary, propagate, audit, resonant-probabilities");
    {
        const std::string name = text(doc["scenario"], "scenario");
        bool found = false;
        for (const auto& [v, n] : scenario_names())
            if (n == name) c.scenario = v, found = true;
        if (!found) {
            std::vector<std::string> all;
            for (const auto& [v, n] : scenario_names()) all.push_back(n);
            const std::string hint = suggestion(name, all);
            throw ConfigError("scenario", "unknown scenario '" + name + "'" +
                                              (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
        }
    }
    if (doc.contains("lambda")) c.lambda = number(doc["lambda"], "lambda");
    if (doc.contains("delta")) c.delta = number(doc["delta"], "delta");
    if (doc.contains("omega")) c.omega = number(doc["omega"], "omega");
    if (doc.contains("cavity_length")) c.cavity_length = number(doc["cavity_length"], "cavity_length");
    if (!(c.lambda > 0.0)) throw ConfigError("lambda", "must be > 0");
    if (!(c.cavity_length > 0.0)) throw ConfigError("cavity_length", "must be > 0");

    if (doc.contains("sectors")) {
        const json& s = doc["sectors"];
        if (!s.is_object() || s.empty())
            throw ConfigError("sectors", "expected an object mapping photon number to weight |D_n|^2");
        c.sectors.clear();
        double sum = 0.0;
        for (const auto& [key, val] : s.items()) {
            const std::string field = "sectors." + key;
            int n = -1;
            try {
                std::size_t used = 0;
                n = std::stoi(key, &used);
                if (used != key.size()) n = -1;
            } catch (const std::exception&) {
                n = -1;
            }
            if (n < 0) throw ConfigError(field, "photon number must be a non-negative integer");
            const double w = number(val, field);
            if (w < 0.0) throw ConfigError(field, "weight must be >= 0");
            c.sectors.push_back({n, w});
            sum += w;
        }
        std::sort(c.sectors.begin(), c.sectors.end(), [](auto& a, auto& b) { return a.n < b.n; });
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("sectors", "weights |D_n|^2 sum to " + std::to_string(sum) + ", expected 1 (tolerance 1e-9)");
    }

    if (doc.contains("k")) c.k = number_list(doc["k"], "k");
    for (double k : c.k)
        if (!(k > 0.0)) throw ConfigError("k", "wavenumbers must be > 0");
    c.deltas = doc.contains("deltas") ? number_list(doc["deltas"], "deltas") : default_deltas();
    c.delta_grid = doc.contains("delta_grid") ? number_list(doc["delta_grid"], "delta_grid") : default_delta_grid();

    if (doc.contains("packet")) {
        const json& p = doc["packet"];
        if (!p.is_object()) throw ConfigError("packet", "expected an object");
        check_keys(p, {"k0", "sigma_k", "z0"}, "packet.");
        if (p.contains("k0")) c.packet.k0 = number(p["k0"], "packet.k0");
        if (p.contains("sigma_k")) c.packet.sigma_k = number(p["sigma_k"], "packet.sigma_k");
        if (p.contains("z0")) c.packet.z0 = number(p["z0"], "packet.z0");
    }
    if (!(c.packet.k0 > 0.0)) throw ConfigError("packet.k0", "must be > 0");
    if (!(c.packet.sigma_k > 0.0)) throw ConfigError("packet.sigma_k", "must be > 0");

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        if (!g.is_object()) throw ConfigError("grid", "expected an object");
        check_keys(g, {"z_min", "z_max", "dz"}, "grid.");
        if (g.contains("z_min")) c.grid.z_min = number(g["z_min"], "grid.z_min");
        if (g.contains("z_max")) c.grid.z_max = number(g["z_max"], "grid.z_max");
        if (g.contains("dz")) c.grid.dz = number(g["dz"], "grid.dz");
    }
    if (!(c.grid.dz > 0.0)) throw ConfigError("grid.dz", "must be > 0");

    if (doc.contains("dt")) c.dt = number(doc["dt"], "dt");
    if (!(c.dt > 0.0)) throw ConfigError("dt", "must be > 0");
    if (doc.contains("steps")) {
        c.steps = count(doc["steps"], "steps");
        if (*c.steps == 0) throw ConfigError("steps", "must be >= 1");
    }
    if (doc.contains("record_every")) c.record_every = count(doc["record_every"], "record_every");

    if (doc.contains("basis")) {
        const std::string b = text(doc["basis"], "basis");
        if (b == "bare") c.basis = Basis::bare;
        else if (b == "dressed") c.basis = Basis::dressed;
        else throw ConfigError("basis", "expected 'bare' or 'dressed'");
    }
    if (doc.contains("mode")) {
        const std::string m = text(doc["mode"], "mode");
        if (m == "mesa") c.mode = ModeFunction::Kind::mesa;
        else if (m == "zero") c.mode = ModeFunction::Kind::zero;
        else throw ConfigError("mode", "expected 'mesa' or 'zero'");
    }
    if (doc.contains("absorber")) {
        const json& a = doc["absorber"];
        if (!a.is_object()) throw ConfigError("absorber", "expected an object");
        check_keys(a, {"enabled", "width", "strength"}, "absorber.");
        c.absorber.enabled = true;
        if (a.contains("enabled")) c.absorber.enabled = boolean(a["enabled"], "absorber.enabled");
        if (a.contains("width")) c.absorber.width = number(a["width"], "absorber.width");
        if (a.contains("strength")) c.absorber.strength = number(a["strength"], "absorber.strength");
        if (!(c.absorber.width > 0.0)) throw ConfigError("absorber.width", "must be > 0");
        if (!(c.absorber.strength >= 0.0)) throw ConfigError("absorber.strength", "must be >= 0");
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (!o.is_object()) throw ConfigError("output", "expected an object");
        check_keys(o, {"dir", "prefix", "svg"}, "output.");
        if (o.contains("dir")) c.output.dir = text(o["dir"], "output.dir");
        if (o.contains("prefix")) c.output.prefix = text(o["prefix"], "output.prefix");
        if (o.contains("svg")) c.output.svg = boolean(o["svg"], "output.svg");
    }
    if (c.output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
    if (c.output.prefix.empty()) c.output.prefix = to_string(c.scenario);
    if (c.output.prefix.find('/') != std::string::npos) throw ConfigError("output.prefix", "must not contain '/'");
    if (doc.contains("seed")) c.seed = count(doc["seed"], "seed");

    if (c.scenario == Scenario::residual_sweep && c.k.size() != 1)
        throw ConfigError("k", "residual-sweep takes a single wavenumber");
    if (c.scenario == Scenario::residual_sweep && c.sectors.size() != 1)
        throw ConfigError("sectors", "residual-sweep takes a single photon sector");
    if (c.scenario == Scenario::resonant_probabilities && c.delta != 0.0)
        throw ConfigError("delta", "resonant-probabilities is only valid at delta = 0");
    return c;
}

inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
    json doc = parse_json(text);
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

// Grid, duration and record stride for a propagate run. The packet starts
// 6/sigma_k left of the cavity, the run lasts until its centre has moved
// the same distance past the entrance, and the box leaves six spread
// widths of margin on both sides.
inline PropagationPlan plan_propagation(const RunConfig& c) {
    PropagationPlan plan;
    const double sk = c.packet.sigma_k, dz = c.grid.dz;
    plan.z0 = c.packet.z0.value_or(-6.0 / sk);
    const double velocity = 2.0 * c.packet.k0;
    const double duration = std::abs(plan.z0) / c.packet.k0;
    plan.dt = c.dt;
    plan.steps = c.steps.value_or(static_cast<std::size_t>(std::ceil(duration / c.dt)));
    const double t_end = c.dt * static_cast<double>(plan.steps);
    const double spread = std::hypot(0.5 / sk, 2.0 * sk * t_end);
    const double margin = std::max(6.0 * spread, 5.0 / sk);
    auto snap_down = [&](double z) { return -dz * std::ceil(-z / dz - 1e-9); };
    auto snap_up = [&](double z) { return dz * std::ceil(z / dz - 1e-9); };
    // The reflected part returns to about z0; the transmitted part travels
    // velocity * t_end from z0.
    const double reach_right = std::max(c.cavity_length, plan.z0 + velocity * t_end) + margin;
    const double z_min = c.grid.z_min.value_or(snap_down(plan.z0 - margin));
    const double z_max = c.grid.z_max.value_or(snap_up(reach_right));
    try {
        plan.grid = make_grid(z_min, z_max, dz, c.cavity_length);
    } catch (const InvalidParameter& e) {
        throw ConfigError("grid." + e.field(), e.what());
    }
    plan.record_every = c.record_every > 0 ? c.record_every : std::max<std::size_t>(1, plan.steps / 200);
    return plan;
}

// Fully resolved configuration, used for the manifest and its hash.
inline json to_json(const RunConfig& c) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["lambda"] = c.lambda;
    j["delta"] = c.delta;
    j["omega"] = c.omega;
    j["cavity_length"] = c.cavity_length;
    json sectors = json::object();
    for (const auto& s : c.sectors) sectors[std::to_string(s.n)] = s.weight;
    j["sectors"] = sectors;
    j["k"] = c.k;
    j["deltas"] = c.deltas;
    j["delta_grid"] = c.delta_grid;
    j["packet"] = {{"k0", c.packet.k0}, {"sigma_k", c.packet.sigma_k}};
    if (c.packet.z0) j["packet"]["z0"] = *c.packet.z0;
    j["grid"] = {{"dz", c.grid.dz}};
    if (c.grid.z_min) j["grid"]["z_min"] = *c.grid.z_min;
    if (c.grid.z_max) j["grid"]["z_max"] = *c.grid.z_max;
    j["dt"] = c.dt;
    if (c.steps) j["steps"] = *c.steps;
    j["record_every"] = c.record_every;
    j["basis"] = to_string(c.basis);
    j["mode"] = c.mode == ModeFunction::Kind::zero ? "zero" : "mesa";
    j["absorber"] = {{"enabled", c.absorber.enabled}, {"width", c.absorber.width}, {"strength", c.absorber.strength}};
    j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}, {"svg", c.output.svg}};
    j["seed"] = c.seed;
    return j;
}

}  // namespace mazerlab::io
