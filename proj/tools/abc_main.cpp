#include "abc/cli.hpp"

int main(int argc, char** argv) { return abc::cli::run_cli(argc, argv); }
