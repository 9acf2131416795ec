#include "dlma/cli.hpp"

int main(int argc, char** argv) { return dlma::harness::cli_main(argc, argv); }
