#include "gflame/cli.hpp"

int main(int argc, char** argv) { return gflame::cli::main(argc, argv); }
