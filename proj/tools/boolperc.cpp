#include "boolperc/cli.hpp"

int main(int argc, char** argv) { return boolperc::run_cli(argc, argv); }
