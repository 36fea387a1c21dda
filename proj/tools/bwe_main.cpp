#include "bwe/cli.hpp"

int main(int argc, char** argv) { return bwe::cli::run(argc, argv); }
