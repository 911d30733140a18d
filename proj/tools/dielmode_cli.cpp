#include "dielmode/cli.hpp"

int main(int argc, char** argv) { return dielmode::cli::run(argc, argv); }
