#include "surfcomp/cli.hpp"

int main(int argc, char** argv) { return surfcomp::cli::run(argc, argv); }
