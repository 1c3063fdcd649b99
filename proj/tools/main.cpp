#include "stochper/cli.hpp"

int main(int argc, char** argv) { return stochper::run_cli(argc, argv); }
