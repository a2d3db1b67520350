#include "aucmi/cli.hpp"

int main(int argc, char** argv) { return aucmi::cli::run(argc, argv); }
