#include "qdefense/cli.hpp"

int main(int argc, char** argv) { return qdefense::cli::run(argc, argv); }
