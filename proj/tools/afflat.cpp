#include "afflat/cli.hpp"

int main(int argc, char** argv) { return afflat::cli::run(argc, argv); }
