// Command-line front end for the variable-strength polarization measurement
// simulator. See run() in cli_io for the argument contract.
#include <string>
#include <vector>

#include "weakmeter/cli_io.hpp"

int main(int argc, char** argv) {
    return weakmeter::run(std::vector<std::string>(argv + 1, argv + argc));
}
