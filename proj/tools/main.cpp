#include "srpanova/cli.hpp"

int main(int argc, char** argv) { return srp::cli::run(argc, argv); }
