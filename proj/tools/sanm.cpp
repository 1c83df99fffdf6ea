#include "sanm/cli/commands.hpp"

int main(int argc, char** argv) { return sanm::cli::run_cli(argc, argv); }
