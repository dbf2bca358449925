#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    deceptor::cli::install_signal_handlers();
    std::vector<std::string> args(argv + 1, argv + argc);
    return deceptor::cli::run_cli(args);
}
