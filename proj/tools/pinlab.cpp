#include "pinlab/cli.hpp"

int main(int argc, char** argv) { return pinlab::cli::run(std::vector<std::string>(argv + 1, argv + argc)); }
