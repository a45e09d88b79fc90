// qtm.cpp - Command-line entry point.

#include "qtm/cli.hpp"

int main(int argc, char** argv) { return qtm::cli::run(argc, argv); }
