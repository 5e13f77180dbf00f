#include <string>
#include <vector>

#include "estkit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return estkit::run_cli(args);
}
