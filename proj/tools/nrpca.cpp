#include "nrpca/cli.hpp"

int main(int argc, char** argv) { return nrpca::cli::run(argc, argv); }
