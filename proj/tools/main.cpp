#include "despeckle/cli.hpp"

int main(int argc, char** argv) { return despeckle::run_cli(argc, argv); }
