#include "sonarfuse/cli.hpp"

int main(int argc, char** argv) { return sonarfuse::cli::run(argc, argv); }
