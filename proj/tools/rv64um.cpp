#include "rv64um/cli.hpp"

int main(int argc, char** argv) { return rv64um::cli::main(argc, argv); }
