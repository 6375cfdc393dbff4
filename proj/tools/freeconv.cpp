#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freeconv/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral distributions and Brown measures of polynomials in free variables"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run_cmd = app.add_subcommand("run", "run a task described by a JSON config");
    run_cmd->add_option("config", config_path, "path to the config document")->required();

    CLI::App* selfcheck_cmd =
        app.add_subcommand("selfcheck", "run the built-in closed-form and oracle checks");

    std::string pencil_path, expr;
    int trials = 50, subst_size = 5;
    CLI::App* verify_cmd =
        app.add_subcommand("verify-pencil", "certify a pencil file against an expression");
    verify_cmd->add_option("pencil-file", pencil_path, "pencil in the plain-text format")
        ->required();
    verify_cmd->add_option("expr", expr, "expression over the pencil's variables")->required();
    verify_cmd->add_option("--trials", trials, "random substitutions to test");
    verify_cmd->add_option("--size", subst_size, "substitution matrix size");

    CLI11_PARSE(app, argc, argv);

    using namespace freeconv;
    if (run_cmd->parsed()) {
        const cli::RunResult r = cli::run_file(config_path);
        if (!r.message.empty())
            (r.code == cli::kOk ? std::cout : std::cerr)
                << (r.code == cli::kOk ? "ok: " : "error: ") << r.message << "\n";
        return r.code;
    }
    if (selfcheck_cmd->parsed()) {
        return cli::selfcheck(std::cout) ? cli::kOk : cli::kSelfcheckFailed;
    }
    // verify-pencil
    try {
        const auto pencil = linpen::read_pencil_file(pencil_path);
        const auto poly = ncexpr::parse(expr, pencil.vars);
        linpen::VerifyOptions opts;
        opts.trials = trials;
        opts.m = subst_size;
        const auto report = linpen::verify_pencil(pencil, poly, opts);
        std::printf("verify-pencil: %s (max residual %.3e over %d trials)\n",
                    report.pass ? "PASS" : "FAIL", report.max_residual, report.trials);
        return report.pass ? 0 : 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kNumericalError;
    }
}
