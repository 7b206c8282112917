#include "cmalab/io.hpp"

int main(int argc, char** argv) { return cmalab::run_cli(argc, argv); }
