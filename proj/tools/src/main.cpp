#include "hence_cli/cli.hpp"

int main(int argc, char** argv) { return hence::cli::dispatch(argc, argv); }
