#include "hsunmix/cli.hpp"

int main(int argc, char** argv) { return hsunmix::cli_main(argc, argv); }
