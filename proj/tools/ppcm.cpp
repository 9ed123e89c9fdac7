// ppcm: headless validation, scenario runs, telemetry export and the
// session gateway.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ppcm/config.hpp"
#include "ppcm/errors.hpp"
#include "ppcm/scenario.hpp"
#include "ppcm/simulation.hpp"
#include "ppcm/telemetry.hpp"
#include "ppcm/validation.hpp"
#ifdef PPCM_HAVE_SERVER
#include "ppcm/server.hpp"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

ppcm::AppConfig config_from(const std::string& path) {
    return path.empty() ? ppcm::AppConfig{} : ppcm::load_config(path);
}

int cmd_validate(const std::string& config_path) {
    const auto config = config_from(config_path);
    bool all = true;
    for (const auto& r : ppcm::run_validation(config)) {
        std::cout << r.line() << '\n';
        all = all && r.passed;
    }
    return all ? kOk : kFailed;
}

int cmd_run(const std::string& script_path, const std::string& config_path, const std::string& export_path,
            const std::string& format, bool fail_fast) {
    const auto config = config_from(config_path);
    const auto script = ppcm::load_scenario(script_path);
    // Format is validated before the run so a typo costs nothing.
    std::optional<ppcm::TelemetryFormat> fmt;
    if (!export_path.empty()) {
        fmt = format.empty() ? ppcm::format_for(export_path) : ppcm::parse_format(format);
        if (!fmt) throw ppcm::ConfigError("unknown export format '" + format + "'");
    }
    const auto result = ppcm::run_scenario(script, config, fail_fast);
    if (fmt) ppcm::export_telemetry(result.records, *fmt, export_path);
    std::cout << result.report.summary();
    return result.report.ok() ? kOk : kFailed;
}

int cmd_export(const std::string& in, const std::string& out, const std::string& format,
               const std::string& config_path) {
    const auto config = config_from(config_path);
    const auto fmt = format.empty() ? ppcm::format_for(out) : ppcm::parse_format(format);
    if (!fmt) throw ppcm::ConfigError("unknown export format '" + format + "'");
    const auto records = ppcm::import_telemetry(in, config.geometry, config.protocol.polyline_samples);
    ppcm::export_telemetry(records, *fmt, out);
    std::cout << records.size() << " records written to " << out << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPCM continuum manipulator simulator and gateway"};
    app.require_subcommand(1);

    std::string config_path;
    auto* validate = app.add_subcommand("validate", "Run the kinematic property suites");
    validate->add_option("--config", config_path, "Configuration file (JSON)")->check(CLI::ExistingFile);

    std::string script_path, export_path, format;
    bool fail_fast = false;
    auto* run = app.add_subcommand("run", "Run a scenario script headless");
    run->add_option("--script", script_path, "Scenario script")->required()->check(CLI::ExistingFile);
    run->add_option("--config", config_path, "Configuration file (JSON)")->check(CLI::ExistingFile);
    run->add_option("--export", export_path, "Write telemetry (.csv or .jsonl)");
    run->add_option("--format", format, "Export format: csv or jsonl");
    run->add_flag("--fail-fast", fail_fast, "Stop at the first rejected plant step");

    std::string bind;
    auto* serve = app.add_subcommand("serve", "Serve the session protocol over WebSocket");
    serve->add_option("--config", config_path, "Configuration file (JSON)")->check(CLI::ExistingFile);
    serve->add_option("--bind", bind, "host:port, default from the configuration");

    auto* defaults = app.add_subcommand("default-config", "Print the default configuration as JSON");

    std::string in_path, out_path;
    auto* exp = app.add_subcommand("export", "Convert telemetry between CSV and JSONL");
    exp->add_option("--in", in_path, "Input telemetry")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", out_path, "Output telemetry")->required();
    exp->add_option("--format", format, "Output format: csv or jsonl");
    exp->add_option("--config", config_path, "Configuration used to regenerate polylines")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*defaults) {
            std::cout << ppcm::config_to_json(ppcm::AppConfig{}) << '\n';
            return kOk;
        }
        if (*validate) return cmd_validate(config_path);
        if (*run) return cmd_run(script_path, config_path, export_path, format, fail_fast);
        if (*exp) return cmd_export(in_path, out_path, format, config_path);
        if (*serve) {
#ifdef PPCM_HAVE_SERVER
            const auto config = config_from(config_path);
            return ppcm::run_server(config, bind.empty() ? config.protocol.bind : bind);
#else
            std::cerr << "error: built without the server (PPCM_BUILD_SERVER=OFF)\n";
            return kUsage;
#endif
        }
    } catch (const ppcm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const ppcm::ScriptError& e) {
        std::cerr << "script error: " << e.what() << '\n';
        return kUsage;
    } catch (const ppcm::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ppcm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
