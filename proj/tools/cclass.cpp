#include "cclass/cli.hpp"

int main(int argc, char** argv) { return cclass::cli::run(argc, argv); }
