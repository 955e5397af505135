#include "cli.hpp"

int main(int argc, char** argv) { return smp::cli::run(argc, argv); }
