#include "hmg/cli.hpp"

int main(int argc, char** argv) { return hmg::cli::run_command(argc, argv); }
