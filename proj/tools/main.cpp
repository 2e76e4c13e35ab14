#include "cli.hpp"

int main(int argc, char** argv) { return epiens::cli::run(argc, argv); }
