#include "eqolab/cli.hpp"

int main(int argc, char** argv) { return eqolab::run_cli(argc, argv); }
