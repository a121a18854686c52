#include "swfe/cli.hpp"

int main(int argc, char** argv) { return swfe::cli::dispatch(argc, argv); }
