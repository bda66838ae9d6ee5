#include "fwlab/cli_io.hpp"

int main(int argc, char** argv) { return fwlab::run_command(argc, argv); }
