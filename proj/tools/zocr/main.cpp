#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"zocr: zoning-feature handwritten character recognition toolkit"};
    app.require_subcommand(1);
    const auto commands = zocr::cli::register_commands(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (const auto& cmd : commands) {
        if (!app.got_subcommand(cmd.name)) continue;
        try {
            return cmd.run();
        } catch (const zocr::cli::UsageError& e) {
            std::cerr << "usage error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 2;
}
