#include "nvgrad/commands.hpp"

int main(int argc, char** argv) { return nvgrad::cli::run(argc, argv); }
