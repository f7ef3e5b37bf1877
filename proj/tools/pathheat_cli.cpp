#include "pathheat/cli.hpp"

int main(int argc, char** argv) { return pathheat::run_cli(argc, argv); }
