#include <iostream>

#include "seqid/bench/cli.hpp"

int main(int argc, char** argv) { return seqid::bench::cli_main(argc, argv, std::cout, std::cerr); }
