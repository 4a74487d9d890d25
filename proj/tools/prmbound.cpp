#include "prmbound/cli.hpp"

int main(int argc, char** argv) { return prmbound::cli::run_cli(argc, argv, std::cout, std::cerr); }
