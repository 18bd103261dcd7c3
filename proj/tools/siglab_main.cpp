#include "siglab/cli.hpp"

int main(int argc, char** argv) { return siglab::cli::run(argc, argv); }
