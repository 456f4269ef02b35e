#include "fsge/cli.hpp"

int main(int argc, char** argv) { return fsge::cli::main(argc, argv); }
