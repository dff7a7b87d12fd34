#include "stochrot/cli.hpp"

int main(int argc, char** argv) { return stochrot::cli::run(argc, argv); }
