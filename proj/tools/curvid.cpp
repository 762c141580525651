#include "curvid/cli.hpp"

int main(int argc, char** argv) { return curvid::cli::run(argc, argv); }
