// igkls: verification reports over invariant CP maps and GKLS generators.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "igkls/report.hpp"

namespace {

int emit_error(const std::string& command, const std::string& kind, const std::string& message, bool text) {
    igkls::json report = {{"command", command}, {"status", "error"}, {"error", {{"kind", kind}, {"message", message}}}};
    std::cout << (text ? igkls::render_text(report) : report.dump(2) + "\n");
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural normal forms of invariant CP maps and GKLS generators"};
    std::string command;
    std::vector<std::string> inputs;
    std::string out_path;
    std::string params_text = "{}";
    bool text = false;
    igkls::RunOptions opt;

    app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(igkls::command_names()));
    app.add_option("--in", inputs, "Input bundle (repeatable)");
    app.add_option("--out", out_path, "Write the produced bundle (or the report) to FILE");
    app.add_option("--seed", opt.seed, "Seed for randomized steps and random instances");
    app.add_option("--tol-rank", opt.tol.rank, "Rank-decision tolerance")->check(CLI::PositiveNumber);
    app.add_option("--tol-verify", opt.tol.verify, "Verification tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--text", text, "Human-readable report");
    app.add_option("--kind", opt.kind, "random: bundle kind");
    app.add_option("--params", params_text, "random: generation parameters as a JSON object");
    app.add_option("--mode", opt.mode, "gauge-compare on normal forms: full or algebra");
    app.add_option("--times", opt.times, "probe: sample times");
    app.add_option("--d-a", opt.d_a, "semicausal: dimension of the first subsystem");
    app.add_option("--d-b", opt.d_b, "semicausal: dimension of the second subsystem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        opt.params = igkls::json::parse(params_text);
    } catch (const igkls::json::parse_error& e) {
        return emit_error(command, "ParseError", std::string("--params: ") + e.what(), text);
    }

    std::vector<igkls::InstanceBundle> bundles;
    for (const auto& path : inputs) {
        try {
            bundles.push_back(igkls::decode_file(path));
        } catch (const igkls::Error& e) {
            return emit_error(command, igkls::error_kind_name(e.kind()), path + ": " + e.what(), text);
        }
    }

    const igkls::RunResult result = igkls::run_command(command, bundles, opt);
    std::cout << (text ? igkls::render_text(result.report) : result.report.dump(2) + "\n");
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return 2;
        }
        out << (result.artifact ? igkls::encode(*result.artifact) : result.report.dump()) << "\n";
    }
    return result.exit_code;
}
