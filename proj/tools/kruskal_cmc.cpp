#include "kcmc/cli.hpp"

int main(int argc, char** argv) { return kcmc::run_cli(argc, argv); }
