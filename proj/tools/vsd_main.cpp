#include <string>
#include <vector>

#include "vsd/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return vsd::cli::run(args);
}
