#include "segrex/cli.hpp"

int main(int argc, char** argv) { return segrex::cli::run(argc, argv); }
