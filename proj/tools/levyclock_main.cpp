#include "levyclock/cli.hpp"

int main(int argc, char** argv) { return levyclock::cli_main(argc, argv); }
