#include "cli.hpp"

int main(int argc, char** argv) { return renewal::cli::run(argc, argv); }
