#include "rflow/cli.hpp"

int main(int argc, char** argv) { return rflow::cli::run(argc, argv); }
