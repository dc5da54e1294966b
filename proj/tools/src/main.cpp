#include "alle/cli.hpp"

int main(int argc, char** argv) { return alle::cli::run(argc, argv); }
