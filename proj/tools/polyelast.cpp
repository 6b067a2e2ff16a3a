#include "polyelast/cli.hpp"

int main(int argc, char** argv) { return polyelast::cli::run(argc, argv); }
