#include "cli.hpp"

int main(int argc, char** argv) { return casray::cli::run(argc, argv); }
