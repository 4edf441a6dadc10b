#include "spinlet/cli.hpp"

int main(int argc, char** argv) { return spinlet::cli::run(argc, argv); }
