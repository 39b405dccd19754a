#include "tensorreg/cli.hpp"

int main(int argc, char** argv) { return tensorreg::run_cli(argc, argv); }
