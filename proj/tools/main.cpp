#include "ehrlab/cli.hpp"
int main(int argc, char** argv) { return ehrlab::cli::run(argc, argv); }
