#include "sgae/cli.hpp"

int main(int argc, char** argv) { return sgae::cli::run(argc, argv); }
