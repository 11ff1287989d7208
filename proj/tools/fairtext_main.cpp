#include "fairtext/cli.hpp"

int main(int argc, char** argv) { return fairtext::cli::run(argc, argv); }
