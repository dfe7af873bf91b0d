#include "clgbn/cli.hpp"

int main(int argc, char** argv) { return clgbn::cli::run(argc, argv); }
