#include "cocoaug/cli.hpp"

int main(int argc, char** argv) { return cocoaug::cli::run(argc, argv); }
