#include <iostream>
#include <string>
#include <vector>

#include "qprog/runner.hpp"

namespace {

const char* kUsage =
    "usage: qprog <command> [--key=value ...] [--config file]\n"
    "commands:\n"
    "  scan        --z --K [--delta --P --B]\n"
    "  moment1     --z --K [--B --P --sensitivity]\n"
    "  moment2     --z --K --delta [--B --P --t_samples --seed]\n"
    "  dispersion  --z --K --delta [--B --C --P --grid --seed --m_tilde]\n"
    "  lemmas      [--seed --samples]\n"
    "  singular    --K [--P | --tol]\n"
    "  constant    [--P]\n"
    "  cache       --action stat|clear|warm [--lo --hi]\n"
    "common keys: --output_dir --cache_dir --threads\n";

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "-h" || args[0] == "--help" || args[0] == "help") {
        std::cout << kUsage;
        return args.empty() ? 1 : 0;
    }
    qprog::RunConfig cfg;
    try {
        cfg = qprog::parse_config(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return qprog::run(cfg);
}
