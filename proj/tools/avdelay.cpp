#include "avdelay/cli.hpp"

int main(int argc, char** argv) { return avdelay::cli::cli_main(argc, argv); }
