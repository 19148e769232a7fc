#include "loomgen/cli.hpp"

int main(int argc, char** argv) { return loomgen::cli::run(argc, argv); }
