#include "cli.hpp"

int main(int argc, char** argv) { return tlsnl::cli::run(argc, argv); }
