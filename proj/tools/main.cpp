#include "commands.hpp"

int main(int argc, char** argv) { return eegdx::cli::run(argc, argv); }
