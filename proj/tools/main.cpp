#include "pettis/cli.hpp"

int main(int argc, char** argv) { return pettis::run_cli(argc, argv); }
