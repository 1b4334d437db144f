#include "dirk/cli.hpp"

int main(int argc, char** argv) { return dirk::run_cli(argc, argv); }
