// mazerlab - command-line scenario runner.
//
//   mazerlab <scenario> [--config FILE] [--set key=value]... [--jobs N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 1 any other error (for example an I/O failure).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mazerlab/io/config.hpp"
#include "mazerlab/io/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

const char* kUnitsHelp =
    "Units: hbar = 1 and 2M = 1, so the kinetic operator is -d^2/dz^2 and a plane\n"
    "wave e^{ikz} carries energy k^2. lambda (coupling), delta (= omega0 - omega)\n"
    "and omega are energies in that unit; cavity_length, z and dz are lengths in\n"
    "units of 1/k; t and dt are times in units of 1/energy. gamma^2 = lambda.\n"
    "The common sector energy omega (n + 1/2) is dropped (interaction picture).\n"
    "\n"
    "Config keys: scenario, lambda, delta, omega, cavity_length, sectors\n"
    "({\"n\": |D_n|^2, ...}, weights sum to 1), k (number or list), deltas,\n"
    "delta_grid, packet{k0, sigma_k, z0}, grid{z_min, z_max, dz}, dt, steps,\n"
    "record_every, basis (bare|dressed), mode (mesa|zero),\n"
    "absorber{enabled, width, strength}, output{dir, prefix, svg}, seed.\n"
    "\n"
    "Exit codes: 0 success, 2 configuration error, 3 numerical failure.";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mazerlab::io::ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    namespace io = mazerlab::io;

    CLI::App app{"mazerlab: coupled-channel mazer scattering and the dressed-state separability test"};
    app.footer(kUnitsHelp);
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 0;

    const std::vector<std::pair<std::string, std::string>> scenarios = {
        {"residual", "residual of the claimed stationary state in the coupled equations"},
        {"residual-sweep", "claimed-state residual over a list of detunings"},
        {"stationary", "exact stationary scattering probabilities at any detuning"},
        {"propagate", "wave-packet propagation and the atomic inversion W(t)"},
        {"audit", "off-diagonal couplings in the bare and dressed bases vs detuning"},
        {"resonant-probabilities", "probabilities from the claimed coefficients (delta = 0 only)"},
    };
    for (const auto& [name, description] : scenarios) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", overrides, "override a key, e.g. --set delta=0.5 --set packet.sigma_k=0.02")
            ->take_all();
        sub->add_option("-j,--jobs", jobs, "worker threads (default: MAZERLAB_JOBS, else all processors)")
            ->check(CLI::PositiveNumber);
        sub->footer(kUnitsHelp);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string scenario = app.get_subcommands().front()->get_name();
    try {
        io::json doc = config_path.empty() ? io::json::object() : io::parse_json(read_file(config_path));
        if (!doc.is_object()) throw io::ConfigError("<json>", "top level must be an object");
        if (doc.contains("scenario") && doc["scenario"] != scenario)
            throw io::ConfigError("scenario", "config names '" + doc["scenario"].dump() +
                                                  "' but the subcommand is '" + scenario + "'");
        doc["scenario"] = scenario;
        for (const auto& o : overrides) io::apply_override(doc, o);
        const io::RunConfig config = io::config_from_json(doc);

        io::RunOptions options;
        if (jobs > 0) options.jobs = static_cast<std::size_t>(jobs);
        const io::RunResult result = io::run(config, options);
        for (const auto& p : result.outputs) std::cout << "wrote " << p.string() << "\n";
        std::cout << "summary " << result.summary.dump() << "\n";
        return kExitOk;
    } catch (const io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mazerlab::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const mazerlab::DegenerateThreshold& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const mazerlab::InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mazerlab::OutOfValidity& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
