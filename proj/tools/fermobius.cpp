#include "fermobius/cli.hpp"

int main(int argc, char** argv) { return fm::cli::main_entry(argc, argv); }
