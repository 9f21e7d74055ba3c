#include "spinspec/cli.hpp"

int main(int argc, char** argv) { return spinspec::run_cli(argc, argv); }
