#include "vmsns/cli.hpp"

int main(int argc, char** argv) { return vmsns::cli_dispatch(argc, argv); }
