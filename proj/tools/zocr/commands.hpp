#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace zocr::cli {

/// Bad flag values detected before any work starts; exits with status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Command {
    std::string name;
    std::function<int()> run;
};

/// Registers every subcommand on `app`. Each returned runner is bound to
/// option storage owned by the registry, so it must outlive parsing.
std::vector<Command> register_commands(CLI::App& app);

}  // namespace zocr::cli
